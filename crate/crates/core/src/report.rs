//! Flat report records shared by every suite, and their text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operators::sweep::{BoundednessReport, CellStatus};

/// A float that survives JSON: non-finite values travel as `"inf"`, `"-inf"`, `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_num(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            F(f64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::F(x) => Ok(Num(x)),
            Repr::S(s) => parse_num(&s).map(Num).ok_or_else(|| serde::de::Error::custom(format!("not a number: {s}"))),
        }
    }
}

/// `inf`, `-inf`, `nan` or the shortest round-trip decimal.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// `#[serde(with = "nums")]` for `Vec<f64>` fields that may hold `"inf"`.
pub mod nums {
    use super::Num;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(|&x| Num(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Ok(Vec::<Num>::deserialize(d)?.into_iter().map(|n| n.0).collect())
    }
}

/// `#[serde(with = "opt_num")]` for `Option<f64>` fields that may hold `"inf"`.
pub mod opt_num {
    use super::Num;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        x.map(Num).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        Ok(Option::<Num>::deserialize(d)?.map(|n| n.0))
    }
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" | "-Infinity" => Some(f64::NEG_INFINITY),
        "nan" | "NaN" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// One check. `params` holds the numeric parameters of the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub suite: String,
    pub params: BTreeMap<String, Num>,
    pub check_id: String,
    pub lhs: Num,
    pub rhs: Num,
    pub ratio: Num,
    pub pass: bool,
    pub notes: String,
}

/// Prefix of `notes` on records for cells outside the hypotheses.
pub const EXCLUDED: &str = "excluded: ";

impl ReportRecord {
    pub fn new(suite: &str, check_id: impl Into<String>, lhs: f64, rhs: f64, pass: bool) -> Self {
        let ratio = if rhs == 0.0 && lhs == 0.0 { 1.0 } else { lhs / rhs };
        Self {
            suite: suite.to_string(),
            params: BTreeMap::new(),
            check_id: check_id.into(),
            lhs: Num(lhs),
            rhs: Num(rhs),
            ratio: Num(ratio),
            pass,
            notes: String::new(),
        }
    }

    /// A cell that was not run, with the reason.
    pub fn excluded(suite: &str, check_id: impl Into<String>, reason: &str) -> Self {
        let mut r = Self::new(suite, check_id, f64::NAN, f64::NAN, true);
        r.ratio = Num(f64::NAN);
        r.notes = format!("{EXCLUDED}{reason}");
        r
    }

    pub fn is_excluded(&self) -> bool {
        self.notes.starts_with(EXCLUDED)
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), Num(value));
        self
    }

    pub fn params(mut self, pairs: &[(&str, f64)]) -> Self {
        for &(k, v) in pairs {
            self.params.insert(k.to_string(), Num(v));
        }
        self
    }

    pub fn ratio(mut self, ratio: f64) -> Self {
        self.ratio = Num(ratio);
        self
    }

    pub fn notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    fn params_text(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={}", fmt_num(v.0))).collect::<Vec<_>>().join(";")
    }
}

pub fn to_json(records: &[ReportRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)? + "\n")
}

pub fn from_json(text: &str) -> Result<Vec<ReportRecord>> {
    Ok(serde_json::from_str(text)?)
}

const HEADER: [&str; 8] = ["suite", "params", "check_id", "lhs", "rhs", "ratio", "pass", "notes"];

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Tab-separated with a header line; fields are quoted only when needed.
pub fn to_tsv(records: &[ReportRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_error)?;
    for r in records {
        w.write_record([
            r.suite.clone(),
            r.params_text(),
            r.check_id.clone(),
            fmt_num(r.lhs.0),
            fmt_num(r.rhs.0),
            fmt_num(r.ratio.0),
            r.pass.to_string(),
            r.notes.clone(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_tsv(text: &str) -> Result<Vec<ReportRecord>> {
    let mut rd = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(text.as_bytes());
    if !rd.headers().map_err(csv_error)?.iter().eq(HEADER) {
        return Err(Error::Parse("missing report header".into()));
    }
    let num = |s: &str, what: &str| parse_num(s).ok_or_else(|| Error::Parse(format!("bad {what} `{s}`")));
    rd.records()
        .map(|row| {
            let cols = row.map_err(csv_error)?;
            let mut params = BTreeMap::new();
            for kv in cols[1].split(';').filter(|s| !s.is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad parameter `{kv}`")))?;
                params.insert(k.to_string(), Num(num(v, "parameter")?));
            }
            Ok(ReportRecord {
                suite: cols[0].to_string(),
                params,
                check_id: cols[2].to_string(),
                lhs: Num(num(&cols[3], "lhs")?),
                rhs: Num(num(&cols[4], "rhs")?),
                ratio: Num(num(&cols[5], "ratio")?),
                pass: cols[6].parse().map_err(|_| Error::Parse(format!("bad pass `{}`", &cols[6])))?,
                notes: cols[7].to_string(),
            })
        })
        .collect()
}

/// Reads either rendering.
pub fn parse_report(text: &str) -> Result<Vec<ReportRecord>> {
    if text.trim_start().starts_with('[') {
        from_json(text)
    } else {
        from_tsv(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub excluded: usize,
    pub pass: bool,
}

pub fn summarize(records: &[ReportRecord]) -> Summary {
    let excluded = records.iter().filter(|r| r.is_excluded()).count();
    let failed = records.iter().filter(|r| !r.pass).count();
    let checks = records.len() - excluded;
    Summary { checks, passed: checks - failed, failed, excluded, pass: failed == 0 }
}

/// `t K(t)` per line.
pub fn k_curve_text(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (t, k) in points {
        let _ = writeln!(out, "{} {}", fmt_num(*t), fmt_num(*k));
    }
    out
}

/// Parameter cell, max ratio, refinement drift and status per line, tab-separated.
pub fn boundedness_table(report: &BoundednessReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
    w.write_record(["operator", "a", "p", "q", "r", "max_ratio", "refined_ratio", "drift", "pass", "status", "reason"])
        .map_err(csv_error)?;
    for c in &report.cells {
        let status = match c.status {
            CellStatus::Pass => "pass",
            CellStatus::Unreliable => "unreliable",
            CellStatus::Excluded => "excluded",
        };
        w.write_record([
            report.operator.to_string(),
            fmt_num(c.params.a),
            fmt_num(c.params.p),
            fmt_num(c.params.q),
            fmt_num(c.params.r),
            fmt_num(c.ratio),
            fmt_num(c.refined_ratio),
            fmt_num(c.drift),
            (c.status == CellStatus::Pass).to_string(),
            status.to_string(),
            c.reason.clone().unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
