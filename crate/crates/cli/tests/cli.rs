use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lhlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhlab")).args(args).output().expect("spawn lhlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lorentz_equivalence_hits_the_constant_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = lhlab(&["verify", "lorentz-equivalence", "--p", "2", "--r", "1", "--output", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let max = recs.iter().map(|r| r["ratio"].as_f64().unwrap()).fold(0.0, f64::max);
    assert!((max - 2.0).abs() < 1e-12, "max ratio {max}");
    assert!(recs.iter().all(|r| r["pass"] == true));
}

#[test]
fn divergence_example_passes() {
    let o = lhlab(&["verify", "example-divergence"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("0 failed"));
    assert!(stdout(&o).contains("partial-sum/1"));
}

#[test]
fn herz_norm_of_two_step_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    fs::write(&input, r#"[{"type":"radial_step","dim":1,"breakpoints":[0,0.5,1],"values":[2,1]}]"#).unwrap();
    let o = lhlab(&["norm", "--space", "hl", "--a", "1", "--p", "2", "--q", "1", "--r", "2", "--input", path(&input)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let last = stdout(&o).lines().rfind(|l| !l.starts_with('#')).unwrap().to_string();
    let v: f64 = last.split_whitespace().last().unwrap().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-12, "{last}");
}

#[test]
fn bad_configuration_exits_two() {
    let o = lhlab(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
    let o = lhlab(&["verify", "boundedness", "--operator", "hilbert", "--r", "inf"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = lhlab(&["gen-corpus", "--kind", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_report_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.json");
    fs::write(
        &input,
        r#"[{"suite":"s","params":{"p":2.0},"check_id":"c/1","lhs":3.0,"rhs":1.0,"ratio":3.0,"pass":false,"notes":"too big"},
            {"suite":"s","params":{"p":2.0},"check_id":"c/2","lhs":1.0,"rhs":1.0,"ratio":1.0,"pass":true,"notes":""}]"#,
    )
    .unwrap();
    let o = lhlab(&["report", path(&input), "--failed", "--view", "tsv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("c/1") && !text.contains("c/2"), "{text}");
}

#[test]
fn generated_corpus_feeds_the_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.json");
    let o = lhlab(&["gen-corpus", "--kind", "random-step", "--size", "4", "--seed", "7", "--output", path(&corpus)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = lhlab(&["gen-corpus", "--kind", "random-step", "--size", "4", "--seed", "7"]);
    assert_eq!(stdout(&again), fs::read_to_string(&corpus).unwrap());

    let o = lhlab(&["rearrange", "--input", path(&corpus), "--at", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("# function").count(), 8);

    let o = lhlab(&["kfunc", "--input", path(&corpus), "--couple", "l1-linf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<(f64, f64)> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let cols: Vec<f64> = l.split_whitespace().map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 2, "{l}");
            (cols[0], cols[1])
        })
        .collect();
    assert!(rows.len() > 2);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1 * (1.0 + 1e-12)));
}

#[test]
fn report_converts_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let tsv = dir.path().join("r.tsv");
    assert_eq!(lhlab(&["verify", "rearrange", "--output", path(&json)]).status.code(), Some(0));
    let o = lhlab(&["report", path(&json), "--view", "tsv", "--output", path(&tsv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(&tsv).unwrap().starts_with("suite\tparams\tcheck_id\tlhs\trhs\tratio\tpass\tnotes"));
    let back = lhlab(&["report", path(&tsv), "--view", "json"]);
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&back)).unwrap();
    assert_eq!(a, b);
    let o = lhlab(&["report", path(&json)]);
    assert!(stdout(&o).contains("PASS"), "{}", stdout(&o));
}
