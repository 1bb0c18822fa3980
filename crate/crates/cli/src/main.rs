use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lhlab_core::corpus::{self, CorpusKind, GenSpec, Record};
use lhlab_core::herz::{self, EmbeddingVariant, HerzParams};
use lhlab_core::interp::kfunc::{k_curve, AnnularCurve, Base, CoupleSpec, KCurve, L1LinfCurve, SeqCurve};
use lhlab_core::interp::{retract_l, InterpSuite};
use lhlab_core::lorentz::{lorentz_quasi_norm, lorentz_star_norm, LorentzParams, STAR_TOL};
use lhlab_core::operators::Operator;
use lhlab_core::report::{self, fmt_num, parse_num, ReportRecord};
use lhlab_core::suites::{run_suite, SuiteConfig};
use lhlab_core::Error;

#[derive(Parser)]
#[command(name = "lhlab", version, about = "Exact step-function laboratory for Lorentz-Herz norms and interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of every function in a corpus file.
    Norm(NormArgs),
    /// Decreasing rearrangement of every function in a corpus file.
    Rearrange(RearrangeArgs),
    /// K-functional curve `t K(t)` of one corpus member.
    Kfunc(KfuncArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Write a deterministic corpus.
    GenCorpus(GenArgs),
    /// Summarize or convert a report.
    Report(ReportArgs),
}

fn num(s: &str) -> Result<f64, String> {
    parse_num(s).ok_or_else(|| format!("not a number: `{s}`"))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    /// Lorentz quasi-norm.
    Lorentz,
    /// Lorentz norm built on the average rearrangement.
    LorentzStar,
    /// Lorentz-Herz norm over the quasi-norm.
    Hl,
    /// Lorentz-Herz norm over the starred norm.
    HlStar,
    /// Lebesgue norm.
    Lp,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum)]
    space: Space,
    #[arg(long, value_parser = num, default_value = "0")]
    a: f64,
    #[arg(long, value_parser = num)]
    p: f64,
    /// Outer exponent; defaults to `p`.
    #[arg(long, value_parser = num)]
    q: Option<f64>,
    /// Lorentz exponent; defaults to `p`.
    #[arg(long, value_parser = num)]
    r: Option<f64>,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct RearrangeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Also print `t f*(t) f**(t)` at these points.
    #[arg(long, value_delimiter = ',', value_parser = num)]
    at: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoupleKind {
    /// Weighted sequence spaces over a Lorentz base, through the annulus retract.
    Seq,
    /// `(L^1, L^inf)`.
    L1Linf,
    /// Herz couples over `(L^1, L^inf)` annulus by annulus.
    Annular,
}

#[derive(Args)]
struct KfuncArgs {
    #[arg(long)]
    input: PathBuf,
    /// Index of the corpus member.
    #[arg(long, default_value_t = 0)]
    member: usize,
    #[arg(long, value_enum, default_value = "seq")]
    couple: CoupleKind,
    #[arg(long, value_parser = num, default_value = "0")]
    a0: f64,
    #[arg(long, value_parser = num, default_value = "1")]
    q0: f64,
    #[arg(long, value_parser = num, default_value = "1")]
    a1: f64,
    #[arg(long, value_parser = num, default_value = "1")]
    q1: f64,
    /// Lorentz base of the sequence couple.
    #[arg(long, value_parser = num, default_value = "2")]
    p: f64,
    #[arg(long, value_parser = num, default_value = "2")]
    r: f64,
    /// `t` runs over `[2^-T, 2^T]`.
    #[arg(long, value_parser = num, default_value = "20")]
    t_bound: f64,
    #[arg(long, default_value_t = 8)]
    per_octave: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name; optional when the config file names one.
    suite: Option<String>,
    /// JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = num, allow_hyphen_values = true)]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = num, allow_hyphen_values = true)]
    a_fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = num)]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = num)]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = num)]
    r: Vec<f64>,
    #[arg(long, value_parser = num)]
    theta: Option<f64>,
    #[arg(long, value_parser = num, allow_hyphen_values = true)]
    a0: Option<f64>,
    #[arg(long, value_parser = num, allow_hyphen_values = true)]
    a1: Option<f64>,
    #[arg(long, value_parser = num)]
    q0: Option<f64>,
    #[arg(long, value_parser = num)]
    q1: Option<f64>,
    #[arg(long, value_parser = num)]
    t_bound: Option<f64>,
    #[arg(long)]
    density: Option<usize>,
    #[arg(long, value_parser = num)]
    stability: Option<f64>,
    #[arg(long = "dim", value_delimiter = ',')]
    dims: Vec<u32>,
    #[arg(long, allow_hyphen_values = true)]
    cutoff: Option<i32>,
    /// Annulus window `lo,hi` of the interaction scan.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    window: Option<Vec<i32>>,
    #[arg(long)]
    corpus: Vec<PathBuf>,
    #[arg(long)]
    corpus_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "operator", value_delimiter = ',')]
    operators: Vec<String>,
    #[arg(long = "variant", value_delimiter = ',')]
    variants: Vec<String>,
    #[arg(long = "interp-suite", value_delimiter = ',')]
    interp_suites: Vec<String>,
    #[arg(long)]
    v_max: Option<i32>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long, value_parser = num)]
    half_width: Option<f64>,
    /// Report file; the report goes to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format; defaults to the output extension, else JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Directory for tables the suite produces.
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 50)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    dim: u32,
    /// Measures of the indicators for `characteristic`.
    #[arg(long, value_delimiter = ',', value_parser = num)]
    measures: Vec<f64>,
    /// `shells`: the sets of measure `2/u^2` at the outer edge of each annulus.
    #[arg(long)]
    divergence_family: bool,
    #[arg(long, value_parser = num, default_value = "8")]
    half_width: f64,
    #[arg(long, default_value_t = 4096)]
    cells: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportView {
    Summary,
    Json,
    Tsv,
}

#[derive(Args)]
struct ReportArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "summary")]
    view: ReportView,
    /// Keep only failing checks.
    #[arg(long)]
    failed: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failing checks, as opposed to errors.
struct ChecksFailed;

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<Record>> {
    Ok(corpus::read_corpus(path)?)
}

fn norm(args: NormArgs) -> anyhow::Result<()> {
    let records = read(&args.input)?;
    let (q, r) = (args.q.unwrap_or(args.p), args.r.unwrap_or(args.p));
    let mut out = String::new();
    for (i, rec) in records.iter().enumerate() {
        let value = match (rec, args.space) {
            (Record::RadialStep(f), Space::Lorentz) => lorentz_quasi_norm(f, LorentzParams::new(args.p, r)?),
            (Record::RadialStep(f), Space::LorentzStar) => lorentz_star_norm(f, LorentzParams::new(args.p, r)?, STAR_TOL)?,
            (Record::RadialStep(f), Space::Hl) => herz::hl_norm(f, HerzParams::new(args.a, args.p, q, r)?, false)?,
            (Record::RadialStep(f), Space::HlStar) => herz::hl_norm(f, HerzParams::new(args.a, args.p, q, r)?, true)?,
            (Record::RadialStep(f), Space::Lp) => f.lp_norm(args.p),
            (Record::Grid1D(g), Space::Hl) => g.hl_norm(HerzParams::new(args.a, args.p, q, r)?, false)?,
            (Record::Grid1D(g), Space::HlStar) => g.hl_norm(HerzParams::new(args.a, args.p, q, r)?, true)?,
            (Record::Grid1D(g), Space::Lp) => g.lp_norm(args.p),
            (Record::Grid1D(g), _) => lorentz_on_grid(g, args.space, LorentzParams::new(args.p, r)?)?,
            (Record::WeightedSeq { entries }, _) => entries.ell_norm(args.a, q),
        };
        if records.len() == 1 {
            writeln!(out, "{}", fmt_num(value))?;
        } else {
            writeln!(out, "{i}\t{}", fmt_num(value))?;
        }
    }
    emit(&out, None)
}

fn lorentz_on_grid(g: &lhlab_core::operators::GridFunction1D, space: Space, params: LorentzParams) -> anyhow::Result<f64> {
    let profile = g.rearrangement();
    Ok(match space {
        Space::LorentzStar => lhlab_core::lorentz::star_norm(&profile, params, STAR_TOL)?,
        _ => lhlab_core::lorentz::quasi_norm(&profile, params),
    })
}

fn rearrange(args: RearrangeArgs) -> anyhow::Result<()> {
    let records = read(&args.input)?;
    let mut out = String::new();
    for (i, rec) in records.iter().enumerate() {
        let g = match rec {
            Record::RadialStep(f) => f.rearrangement(),
            Record::Grid1D(f) => f.rearrangement(),
            Record::WeightedSeq { .. } => bail!("record {i} is a sequence, not a function"),
        };
        writeln!(out, "# function {i}: start end level")?;
        for (a, b, w) in g.segments() {
            writeln!(out, "{}\t{}\t{}", fmt_num(a), fmt_num(b), fmt_num(w))?;
        }
        if !args.at.is_empty() {
            writeln!(out, "# function {i}: t f*(t) f**(t)")?;
            for &t in &args.at {
                let avg = lhlab_core::rearrange::average_rearrangement(&g, t)?;
                writeln!(out, "{}\t{}\t{}", fmt_num(t), fmt_num(g.value_at(t)), fmt_num(avg))?;
            }
        }
    }
    emit(&out, None)
}

fn kfunc(args: KfuncArgs) -> anyhow::Result<()> {
    let records = read(&args.input)?;
    let Some(rec) = records.get(args.member) else {
        return Err(Error::InvalidParams(format!("member {} out of range ({} records)", args.member, records.len())).into());
    };
    let base = LorentzParams::new(args.p, args.r)?;
    let curve: Box<dyn KCurve> = match (args.couple, rec) {
        (CoupleKind::Seq, Record::WeightedSeq { entries }) => {
            Box::new(SeqCurve::new(entries.clone(), CoupleSpec::new(args.a0, args.q0, args.a1, args.q1, Base::lorentz(base))?)?)
        }
        (CoupleKind::Seq, Record::RadialStep(f)) => Box::new(SeqCurve::new(
            retract_l(f, base)?.scores,
            CoupleSpec::new(args.a0, args.q0, args.a1, args.q1, Base::lorentz(base))?,
        )?),
        (CoupleKind::L1Linf, Record::RadialStep(f)) => Box::new(L1LinfCurve::new(f)),
        (CoupleKind::Annular, Record::RadialStep(f)) => {
            Box::new(AnnularCurve::new(f, CoupleSpec::new(args.a0, args.q0, args.a1, args.q1, Base::L1Linf)?)?)
        }
        (_, r) => return Err(Error::InvalidParams(format!("this couple does not take {} records", r.kind())).into()),
    };
    if !(args.t_bound > 0.0 && args.t_bound.is_finite()) || args.per_octave == 0 {
        return Err(Error::InvalidParams("need a positive finite t bound and at least one point per octave".into()).into());
    }
    let steps = (2.0 * args.t_bound * args.per_octave as f64).round() as i64;
    let ts: Vec<f64> = (0..=steps).map(|k| (-args.t_bound + k as f64 / args.per_octave as f64).exp2()).collect();
    let points = k_curve(curve.as_ref(), &ts)?;
    emit(&report::k_curve_text(&points), args.output.as_deref())
}

fn parse_all<T: std::str::FromStr>(xs: &[String]) -> Result<Vec<T>, T::Err> {
    xs.iter().map(|s| s.parse()).collect()
}

fn verify_config(args: &VerifyArgs) -> anyhow::Result<SuiteConfig> {
    let mut cfg = match &args.config {
        Some(path) => SuiteConfig::from_json(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = &args.suite {
        cfg.suite = s.clone();
    }
    if cfg.suite.is_empty() {
        return Err(Error::InvalidParams("no suite named on the command line or in the config".into()).into());
    }
    let set = |dst: &mut Vec<f64>, src: &[f64]| {
        if !src.is_empty() {
            *dst = src.to_vec();
        }
    };
    set(&mut cfg.a, &args.a);
    set(&mut cfg.a_fractions, &args.a_fractions);
    set(&mut cfg.p, &args.p);
    set(&mut cfg.q, &args.q);
    set(&mut cfg.r, &args.r);
    cfg.theta = args.theta.or(cfg.theta);
    cfg.a0 = args.a0.or(cfg.a0);
    cfg.a1 = args.a1.or(cfg.a1);
    cfg.q0 = args.q0.or(cfg.q0);
    cfg.q1 = args.q1.or(cfg.q1);
    cfg.t_bound = args.t_bound.or(cfg.t_bound);
    cfg.density = args.density.or(cfg.density);
    cfg.stability = args.stability.or(cfg.stability);
    if !args.dims.is_empty() {
        cfg.dims = args.dims.clone();
    }
    cfg.cutoff = args.cutoff.or(cfg.cutoff);
    if let Some(w) = &args.window {
        cfg.window = Some((w[0], w[1]));
    }
    if !args.corpus.is_empty() {
        cfg.corpus = args.corpus.clone();
    }
    cfg.corpus_size = args.corpus_size.or(cfg.corpus_size);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.trials = args.trials.or(cfg.trials);
    if !args.operators.is_empty() {
        cfg.operators = parse_all::<Operator>(&args.operators)?;
    }
    if !args.variants.is_empty() {
        cfg.variants = parse_all::<EmbeddingVariant>(&args.variants)?;
    }
    if !args.interp_suites.is_empty() {
        cfg.interp_suites = parse_all::<InterpSuite>(&args.interp_suites)?;
    }
    cfg.v_max = args.v_max.or(cfg.v_max);
    cfg.cells = args.cells.or(cfg.cells);
    cfg.half_width = args.half_width.or(cfg.half_width);
    Ok(cfg)
}

fn render(records: &[ReportRecord], format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => report::to_json(records)?,
        Format::Tsv => report::to_tsv(records)?,
    })
}

fn format_for(path: Option<&Path>, explicit: Option<Format>) -> Format {
    explicit.unwrap_or(match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("tsv" | "txt" | "csv") => Format::Tsv,
        _ => Format::Json,
    })
}

fn summary_line(name: &str, records: &[ReportRecord]) -> String {
    let s = report::summarize(records);
    let max_ratio = records.iter().filter(|r| !r.is_excluded()).map(|r| r.ratio.0).filter(|x| x.is_finite()).fold(f64::NAN, f64::max);
    format!(
        "{name}: {} checks, {} passed, {} failed, {} excluded; max ratio {}; {}",
        s.checks,
        s.passed,
        s.failed,
        s.excluded,
        fmt_num(max_ratio),
        if s.pass { "PASS" } else { "FAIL" }
    )
}

fn verify(args: VerifyArgs) -> anyhow::Result<Result<(), ChecksFailed>> {
    let cfg = verify_config(&args)?;
    let outcome = run_suite(&cfg)?;
    let format = format_for(args.output.as_deref(), args.format);
    emit(&render(&outcome.records, format)?, args.output.as_deref())?;
    if let Some(dir) = &args.artifacts {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, text) in &outcome.artifacts {
            fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))?;
        }
    }
    for r in outcome.records.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} {}: lhs {} rhs {} {}", r.suite, r.check_id, fmt_num(r.lhs.0), fmt_num(r.rhs.0), r.notes);
    }
    eprintln!("{}", summary_line(&cfg.suite, &outcome.records));
    Ok(if outcome.summary().pass { Ok(()) } else { Err(ChecksFailed) })
}

fn gen_corpus(args: GenArgs) -> anyhow::Result<()> {
    let kind: CorpusKind = args.kind.parse()?;
    let spec = GenSpec {
        kind,
        size: args.size,
        seed: args.seed,
        dim: args.dim,
        measures: (!args.measures.is_empty()).then(|| args.measures.clone()),
        divergence_family: args.divergence_family,
        half_width: args.half_width,
        cells: args.cells,
    };
    emit(&corpus::write_corpus(&corpus::gen_corpus(&spec)?)?, args.output.as_deref())
}

fn report_cmd(args: ReportArgs) -> anyhow::Result<Result<(), ChecksFailed>> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut records = report::parse_report(&text)?;
    let pass = report::summarize(&records).pass;
    if args.failed {
        records.retain(|r| !r.pass);
    }
    let out = match args.view {
        ReportView::Json => report::to_json(&records)?,
        ReportView::Tsv => report::to_tsv(&records)?,
        ReportView::Summary => {
            let mut by_suite: Vec<(String, Vec<ReportRecord>)> = Vec::new();
            for r in records {
                match by_suite.iter_mut().find(|(s, _)| *s == r.suite) {
                    Some((_, v)) => v.push(r),
                    None => by_suite.push((r.suite.clone(), vec![r])),
                }
            }
            by_suite.iter().map(|(s, rs)| summary_line(s, rs) + "\n").collect()
        }
    };
    emit(&out, args.output.as_deref())?;
    Ok(if pass { Ok(()) } else { Err(ChecksFailed) })
}

/// Optimizer failures are check failures; everything else in the library is bad input.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Norm(a) => norm(a).map(Ok),
        Command::Rearrange(a) => rearrange(a).map(Ok),
        Command::Kfunc(a) => kfunc(a).map(Ok),
        Command::Verify(a) => verify(a),
        Command::GenCorpus(a) => gen_corpus(a).map(Ok),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(ChecksFailed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
