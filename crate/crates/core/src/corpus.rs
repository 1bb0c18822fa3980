//! Corpus files and deterministic corpus generation.
//!
//! A corpus file holds tagged JSON records, either as one array or as a
//! stream of records (one per line is what the writer produces inside the
//! array). Three record types exist:
//!
//! ```text
//! {"type":"radial_step","dim":1,"breakpoints":[0,1],"values":[2]}
//! {"type":"grid1d","half_width":8,"cells":4,"values":[0,1,1,0]}
//! {"type":"weighted_seq","entries":[[-1,1],[3,0.5]]}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::annulus_radii;
use crate::interp::seq::WeightedSeq;
use crate::interp::Member;
use crate::operators::GridFunction1D;
use crate::rearrange::RadialStepFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    RadialStep(RadialStepFunction),
    #[serde(rename = "grid1d")]
    Grid1D(GridFunction1D),
    WeightedSeq { entries: WeightedSeq },
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::RadialStep(_) => "radial_step",
            Record::Grid1D(_) => "grid1d",
            Record::WeightedSeq { .. } => "weighted_seq",
        }
    }
}

/// Parses an array of records, a single record, or a whitespace-separated stream.
pub fn parse_corpus(text: &str) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (k, value) in serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>().enumerate() {
        let value = value.map_err(|e| Error::Parse(format!("value {k}: {e}")))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            v => vec![v],
        };
        for item in items {
            let n = out.len();
            out.push(serde_json::from_value(item).map_err(|e| Error::Parse(format!("record {n}: {e}")))?);
        }
    }
    Ok(out)
}

pub fn read_corpus(path: &Path) -> Result<Vec<Record>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        e => e,
    })
}

/// A JSON array with one record per line.
pub fn write_corpus(records: &[Record]) -> Result<String> {
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(r)?);
        out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    Ok(out)
}

fn wrong_kind(want: &str, r: &Record) -> Error {
    Error::Parse(format!("expected {want} records, found {}", r.kind()))
}

pub fn radial_functions(records: &[Record]) -> Result<Vec<RadialStepFunction>> {
    records
        .iter()
        .map(|r| match r {
            Record::RadialStep(f) => Ok(f.clone()),
            r => Err(wrong_kind("radial_step", r)),
        })
        .collect()
}

pub fn grid_functions(records: &[Record]) -> Result<Vec<GridFunction1D>> {
    records
        .iter()
        .map(|r| match r {
            Record::Grid1D(f) => Ok(f.clone()),
            r => Err(wrong_kind("grid1d", r)),
        })
        .collect()
}

/// Members for the interpolation suites: sequences and radial functions.
pub fn members(records: &[Record]) -> Result<Vec<Member>> {
    records
        .iter()
        .map(|r| match r {
            Record::RadialStep(f) => Ok(Member::Func(f.clone())),
            Record::WeightedSeq { entries } => Ok(Member::Seq(entries.clone())),
            r => Err(wrong_kind("radial_step or weighted_seq", r)),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    /// Indicators of centred balls.
    Characteristic,
    /// Indicators of shells inside single annuli.
    Shells,
    /// Signed radial step functions on dyadic breakpoints.
    RandomStep,
    /// Block step functions on a uniform grid of `[-R, R]`.
    Grid,
    /// Nonnegative sequences on a few annulus indices.
    Sequence,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 5] = [Self::Characteristic, Self::Shells, Self::RandomStep, Self::Grid, Self::Sequence];

    pub fn name(self) -> &'static str {
        match self {
            Self::Characteristic => "characteristic",
            Self::Shells => "shells",
            Self::RandomStep => "random-step",
            Self::Grid => "grid",
            Self::Sequence => "sequence",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParams(format!("unknown corpus kind `{s}` (expected one of {})", known.join(", ")))
            })
    }
}

/// What to generate. Fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub kind: CorpusKind,
    pub size: usize,
    pub seed: u64,
    pub dim: u32,
    /// Explicit measures for `characteristic`; random ones otherwise.
    pub measures: Option<Vec<f64>>,
    /// `shells`: the sets `B_u = {2^u - 1/u^2 <= |x| < 2^u}`, `u = 1..=size`, of
    /// measure `2/u^2` in one dimension.
    pub divergence_family: bool,
    pub half_width: f64,
    pub cells: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            kind: CorpusKind::RandomStep,
            size: 50,
            seed: 0,
            dim: 1,
            measures: None,
            divergence_family: false,
            half_width: 8.0,
            cells: 4096,
        }
    }
}

/// Dyadic grid for breakpoints; keeps one-dimensional shell arithmetic exact.
const STEP_QUANTUM: f64 = 1.0 / 64.0;

fn random_step(rng: &mut ChaCha8Rng, dim: u32) -> Result<RadialStepFunction> {
    let shells = rng.gen_range(1..=8);
    let mut breakpoints = vec![0.0];
    let mut values = Vec::with_capacity(shells);
    for _ in 0..shells {
        let width = rng.gen_range(4..=160) as f64 * STEP_QUANTUM;
        breakpoints.push(breakpoints.last().unwrap() + width);
        // quarter-integer values in [-4, 4], zero about one time in nine
        values.push(rng.gen_range(-16..=16) as f64 / 4.0 * if rng.gen_bool(1.0 / 9.0) { 0.0 } else { 1.0 });
    }
    RadialStepFunction::new(dim, breakpoints, values)
}

fn random_shell(rng: &mut ChaCha8Rng, dim: u32) -> Result<RadialStepFunction> {
    let u = rng.gen_range(-1..=8);
    let (inner, outer) = annulus_radii(u);
    // sub-shell on a 1/16 subdivision of the annulus
    let a = rng.gen_range(0..16);
    let b = rng.gen_range(a + 1..=16);
    let at = |k: i32| inner + (outer - inner) * k as f64 / 16.0;
    RadialStepFunction::indicator_shell(dim, at(a), at(b))
}

fn divergence_shell(u: usize) -> Result<RadialStepFunction> {
    let outer = (u as f64).exp2();
    RadialStepFunction::indicator_shell(1, outer - 1.0 / (u * u) as f64, outer)
}

fn random_grid(rng: &mut ChaCha8Rng, half_width: f64, cells: usize) -> Result<GridFunction1D> {
    let mut values = vec![0.0; cells];
    let inner = cells / 8..cells - cells / 8;
    for _ in 0..rng.gen_range(1..=4) {
        let lo = rng.gen_range(inner.clone());
        let hi = (lo + rng.gen_range(1..=cells / 4)).min(inner.end);
        let v = rng.gen_range(1..=4) as f64 * if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
        for x in &mut values[lo..hi] {
            *x += v;
        }
    }
    GridFunction1D::new(half_width, values)
}

fn random_sequence(rng: &mut ChaCha8Rng) -> Result<WeightedSeq> {
    let len = rng.gen_range(1..=4);
    WeightedSeq::new((0..len).map(|_| (rng.gen_range(-1..=10), rng.gen_range(1..=8) as f64 / 4.0)))
}

/// Deterministic corpus: the same spec gives the same records, bit for bit.
pub fn gen_corpus(spec: &GenSpec) -> Result<Vec<Record>> {
    if spec.size == 0 && spec.measures.is_none() {
        return Err(Error::InvalidParams("corpus size must be >= 1".into()));
    }
    if spec.dim == 0 {
        return Err(Error::InvalidParams("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.size;
    let records = match spec.kind {
        CorpusKind::Characteristic => {
            let measures: Vec<f64> = match &spec.measures {
                Some(ms) => ms.clone(),
                None => (0..n).map(|_| (rng.gen_range(-16..=16) as f64 / 4.0).exp2()).collect(),
            };
            if measures.is_empty() {
                return Err(Error::InvalidParams("no measures given".into()));
            }
            measures
                .iter()
                .map(|&m| Ok(Record::RadialStep(RadialStepFunction::indicator_ball(spec.dim, m)?)))
                .collect::<Result<Vec<_>>>()?
        }
        CorpusKind::Shells if spec.divergence_family => {
            if spec.dim != 1 {
                return Err(Error::InvalidParams("the B_u family is one-dimensional".into()));
            }
            (1..=n).map(|u| Ok(Record::RadialStep(divergence_shell(u)?))).collect::<Result<Vec<_>>>()?
        }
        CorpusKind::Shells => {
            (0..n).map(|_| Ok(Record::RadialStep(random_shell(&mut rng, spec.dim)?))).collect::<Result<Vec<_>>>()?
        }
        CorpusKind::RandomStep => {
            (0..n).map(|_| Ok(Record::RadialStep(random_step(&mut rng, spec.dim)?))).collect::<Result<Vec<_>>>()?
        }
        CorpusKind::Grid => {
            if spec.cells < 16 || !spec.cells.is_multiple_of(2) {
                return Err(Error::InvalidParams("grid corpora need an even cell count >= 16".into()));
            }
            (0..n)
                .map(|_| Ok(Record::Grid1D(random_grid(&mut rng, spec.half_width, spec.cells)?)))
                .collect::<Result<Vec<_>>>()?
        }
        CorpusKind::Sequence => (0..n)
            .map(|_| Ok(Record::WeightedSeq { entries: random_sequence(&mut rng)? }))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(records)
}

/// `u -> mu(B_u)` of the divergence family, `u = 1..=size`.
pub fn divergence_family_measures(size: usize) -> BTreeMap<i32, f64> {
    (1..=size).map(|u| (u as i32, 2.0 / (u * u) as f64)).collect()
}
