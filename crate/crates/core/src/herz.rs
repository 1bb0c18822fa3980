//! Dyadic annulus decomposition and the non-homogeneous Lorentz-Herz norm
//! `||f||_{HL_{p,q}^{a,r}} = (sum_u 2^{uaq} ||f chi_{A_u}||_{L^{p,r}}^q)^{1/q}`,
//! together with the Hölder, embedding and Banach-function-space checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{annulus_index, annulus_measure, annulus_radii};
use crate::interp::seq::WeightedSeq;
use crate::lorentz::{self, conjugate, LorentzParams, PairingReport, STAR_TOL};
use crate::rearrange::{RadialStepFunction, StepRearrangement};

/// `(a, p, q, r)` of `HL_{p,q}^{a,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerzParams {
    pub a: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl HerzParams {
    pub fn new(a: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParams(format!("weight exponent must be finite, got {a}")));
        }
        if !(q > 0.0) {
            return Err(Error::InvalidParams(format!("need q > 0, got {q}")));
        }
        LorentzParams::new(p, r)?;
        Ok(Self { a, p, q, r })
    }

    pub fn lorentz(&self) -> LorentzParams {
        LorentzParams { p: self.p, r: self.r }
    }

    /// `(-a, p', q', r')`, the space paired against in the Hölder inequality.
    pub fn dual(&self) -> Result<Self> {
        Self::new(-self.a, conjugate(self.p), conjugate(self.q), conjugate(self.r))
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }
}

/// Nonzero restrictions `f chi_{A_u}`, `u >= -1`, in canonical form.
pub fn annuli_decompose(f: &RadialStepFunction) -> Vec<(i32, RadialStepFunction)> {
    let mut groups: BTreeMap<i32, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for (lo, hi, v) in f.shells() {
        if v == 0.0 {
            continue;
        }
        let mut u = annulus_index(lo);
        loop {
            let (inner, outer) = annulus_radii(u);
            if inner >= hi {
                break;
            }
            let (a, b) = (lo.max(inner), hi.min(outer));
            if b > a {
                groups.entry(u).or_default().push((a, b, v));
            }
            u += 1;
        }
    }
    groups
        .into_iter()
        .map(|(u, shells)| {
            let mut breakpoints = vec![0.0];
            let mut values = Vec::with_capacity(shells.len() + 1);
            for (a, b, v) in shells {
                if a > *breakpoints.last().unwrap() {
                    breakpoints.push(a);
                    values.push(0.0);
                }
                breakpoints.push(b);
                values.push(v);
            }
            let piece = RadialStepFunction::new(f.dim(), breakpoints, values).expect("pieces inherit valid breakpoints");
            (u, piece.canonical())
        })
        .collect()
}

/// Rearrangements of the restrictions `f chi_{A_u}`.
pub fn annulus_profiles(f: &RadialStepFunction) -> Vec<(i32, StepRearrangement)> {
    annuli_decompose(f).into_iter().map(|(u, piece)| (u, piece.rearrangement())).collect()
}

/// Lorentz norms of annulus profiles, quasi or starred.
pub fn profile_scores(profiles: &[(i32, StepRearrangement)], base: LorentzParams, starred: bool) -> Result<WeightedSeq> {
    let mut entries = Vec::with_capacity(profiles.len());
    for (u, g) in profiles {
        let y = if starred { lorentz::star_norm(g, base, STAR_TOL)? } else { lorentz::quasi_norm(g, base) };
        entries.push((*u, y));
    }
    WeightedSeq::new(entries)
}

/// Per-annulus Lorentz norms `y_u = ||f chi_{A_u}||_{L^{p,r}}` (starred if asked).
pub fn annulus_scores(f: &RadialStepFunction, base: LorentzParams, starred: bool) -> Result<WeightedSeq> {
    profile_scores(&annulus_profiles(f), base, starred)
}

pub fn hl_norm(f: &RadialStepFunction, params: HerzParams, starred: bool) -> Result<f64> {
    Ok(annulus_scores(f, params.lorentz(), starred)?.ell_norm(params.a, params.q))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub max_ratio: f64,
    /// Corpus indices of the maximizing pair.
    pub argmax: (usize, usize),
    pub pairs: usize,
}

/// Largest `||f+g|| / (||f|| + ||g||)` over all pairs `i <= j` of the corpus.
pub fn quasi_constant_probe(corpus: &[RadialStepFunction], params: HerzParams, starred: bool) -> Result<ProbeReport> {
    if corpus.is_empty() {
        return Err(Error::InvalidParams("empty corpus".into()));
    }
    let norms: Vec<f64> = corpus.iter().map(|f| hl_norm(f, params, starred)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..corpus.len()).flat_map(|i| (i..corpus.len()).map(move |j| (i, j))).collect();
    let ratios: Vec<(f64, (usize, usize))> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let denom = norms[i] + norms[j];
            if denom == 0.0 {
                return Ok((0.0, (i, j)));
            }
            Ok((hl_norm(&corpus[i].add(&corpus[j])?, params, starred)? / denom, (i, j)))
        })
        .collect::<Result<_>>()?;
    let (max_ratio, argmax) = ratios.into_iter().fold((0.0, (0, 0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(ProbeReport { max_ratio, argmax, pairs: pairs.len() })
}

/// `u -> mu(A_u ∩ E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnnulusMeasureSequence {
    Finite { measures: BTreeMap<i32, f64> },
    /// `m_u = c / u^s` for `u >= start`, zero below.
    PowerTail { c: f64, s: f64, start: i32 },
}

impl AnnulusMeasureSequence {
    pub fn get(&self, u: i32) -> f64 {
        match self {
            Self::Finite { measures } => measures.get(&u).copied().unwrap_or(0.0),
            Self::PowerTail { c, s, start } => {
                if u < *start {
                    0.0
                } else {
                    c / (u as f64).powf(*s)
                }
            }
        }
    }

    /// Largest index with a nonzero entry, if the support is finite.
    pub fn last_support(&self) -> Option<i32> {
        match self {
            Self::Finite { measures } => Some(measures.iter().filter(|(_, &m)| m > 0.0).map(|(&u, _)| u).max().unwrap_or(-1)),
            Self::PowerTail { c, .. } if *c == 0.0 => Some(-1),
            Self::PowerTail { .. } => None,
        }
    }

    /// `mu(E) = sum_u m_u`; power tails use the Euler-Maclaurin remainder past `u = 1000`.
    pub fn total_measure(&self) -> f64 {
        match self {
            Self::Finite { measures } => measures.values().sum(),
            Self::PowerTail { c, .. } if *c == 0.0 => 0.0,
            Self::PowerTail { s, .. } if *s <= 1.0 => f64::INFINITY,
            Self::PowerTail { c, s, start } => {
                const N: i32 = 1000;
                let head: f64 = (*start..N.max(*start)).map(|u| self.get(u)).sum();
                let n = N.max(*start) as f64;
                head + c * (n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s / 12.0 * n.powf(-s - 1.0))
            }
        }
    }

    fn validate(&self, dim: u32, cutoff: i32) -> Result<()> {
        if let Self::PowerTail { c, s, start } = self {
            if !(*c >= 0.0 && s.is_finite() && *start >= 1) {
                return Err(Error::InvalidParams("power tail needs c >= 0, finite s, start >= 1".into()));
            }
        }
        let top = match self {
            Self::Finite { measures } => measures.keys().copied().max().unwrap_or(-1).max(cutoff),
            Self::PowerTail { .. } => cutoff,
        };
        if let Self::Finite { measures } = self {
            if let Some(&u) = measures.keys().find(|&&u| u < -1) {
                return Err(Error::InvalidParams(format!("annulus index {u} < -1")));
            }
        }
        for u in -1..=top {
            let m = self.get(u);
            let cap = annulus_measure(dim, u);
            if !(m >= 0.0) || m > cap * (1.0 + 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "mu(A_{u} ∩ E) = {m} outside [0, mu(A_{u}) = {cap}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Finite,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BfsReport {
    /// Indices `-1..=U`.
    pub indices: Vec<i32>,
    /// Terms `2^{uaq} m_u^{q/p}` (or `2^{ua} m_u^{1/p}` when `q = inf`).
    pub terms_a: Vec<f64>,
    /// Partial sums of condition (a); running sup when `q = inf`.
    pub partial_a: Vec<f64>,
    /// Terms `2^{-uaq'} m_u^{q'/p'}`; absent when `p < 1` or `q < 1`.
    pub terms_b: Option<Vec<f64>>,
    pub partial_b: Option<Vec<f64>>,
    /// Whether `(p, q, r)` lies in the range of the sufficient condition.
    pub in_sufficient_range: bool,
    pub verdict: Verdict,
}

fn power_term(m: f64, e: f64) -> f64 {
    // m^0 is the indicator of m > 0
    if e == 0.0 {
        if m > 0.0 { 1.0 } else { 0.0 }
    } else {
        m.powf(e)
    }
}

fn condition_terms(m: &AnnulusMeasureSequence, a: f64, p: f64, q: f64, indices: &[i32]) -> (Vec<f64>, Vec<f64>) {
    let terms: Vec<f64> = indices
        .iter()
        .map(|&u| {
            let w = (u as f64 * a).exp2();
            let mu = m.get(u);
            if q.is_infinite() {
                w * power_term(mu, 1.0 / p)
            } else {
                w.powf(q) * power_term(mu, q / p)
            }
        })
        .collect();
    let mut acc = 0.0;
    let partial = terms
        .iter()
        .map(|&x| {
            acc = if q.is_infinite() { f64::max(acc, x) } else { acc + x };
            acc
        })
        .collect();
    (terms, partial)
}

/// Partial sums of the two Banach-function-space conditions up to annulus `cutoff`.
pub fn bfs_condition_check(
    m: &AnnulusMeasureSequence,
    params: HerzParams,
    dim: u32,
    cutoff: i32,
) -> Result<BfsReport> {
    if cutoff < -1 {
        return Err(Error::InvalidParams("cutoff must be >= -1".into()));
    }
    m.validate(dim, cutoff)?;
    let HerzParams { a, p, q, r } = params;
    if p.is_infinite() {
        return Err(Error::InvalidParams("conditions need p < inf".into()));
    }
    let indices: Vec<i32> = (-1..=cutoff).collect();
    let (terms_a, partial_a) = condition_terms(m, a, p, q, &indices);
    let (terms_b, partial_b) = if p >= 1.0 && q >= 1.0 {
        let (t, s) = condition_terms(m, -a, conjugate(p), conjugate(q), &indices);
        (Some(t), Some(s))
    } else {
        (None, None)
    };
    let in_sufficient_range = p > 1.0 && q >= 1.0 && r >= 1.0;

    let last_ratio_above_one = |terms: &[f64]| {
        let n = terms.len();
        n >= 2 && terms[n - 2] > 0.0 && terms[n - 1] / terms[n - 2] > 1.0
    };
    let verdict = match m.last_support() {
        Some(last) if last <= cutoff => Verdict::Finite,
        _ if last_ratio_above_one(&terms_a) || terms_b.as_deref().is_some_and(last_ratio_above_one) => Verdict::Growing,
        _ => Verdict::Inconclusive,
    };
    Ok(BfsReport { indices, terms_a, partial_a, terms_b, partial_b, in_sufficient_range, verdict })
}

/// `int |fg|` against `||f||_{HL_{p,q}^{a,r}} ||g||_{HL_{p',q'}^{-a,r'}}`, constant 1.
pub fn hl_holder_check(f: &RadialStepFunction, g: &RadialStepFunction, params: HerzParams) -> Result<PairingReport> {
    let HerzParams { p, q, r, .. } = params;
    if !(p > 1.0 && p.is_finite() && q >= 1.0 && r >= 1.0) {
        return Err(Error::Hypothesis(format!("Hölder pairing needs 1<p<inf, q,r>=1; got p={p}, q={q}, r={r}")));
    }
    let integral = f.product_integral(g)?;
    let bound = hl_norm(f, params, false)? * hl_norm(g, params.dual()?, false)?;
    Ok(lorentz::pairing_report(integral, bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingVariant {
    /// Larger second Lorentz index.
    A,
    /// Smaller weight exponent.
    B,
    /// Smaller first Lorentz index, through the weak space.
    C,
    /// Larger outer exponent.
    D,
}

impl std::str::FromStr for EmbeddingVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            "D" => Ok(Self::D),
            _ => Err(Error::InvalidParams(format!("unknown embedding variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    /// Norm in the target space.
    pub lhs: f64,
    /// Bound built from the source space (constant included).
    pub rhs: f64,
    /// Constant applied (largest per-annulus factor for C).
    pub constant: f64,
    /// `lhs / ||f||_source`, the empirical constant.
    pub empirical: f64,
    pub pass: bool,
}

/// Checks `||f||_target <= C ||f||_source` for the chosen embedding.
///
/// The parameters not involved in the variant must agree between `source` and
/// `target`. For `C` the source enters through `||f chi_{A_u}||_{L^{p_2,inf}}`.
pub fn embedding_check(
    variant: EmbeddingVariant,
    f: &RadialStepFunction,
    source: HerzParams,
    target: HerzParams,
) -> Result<EmbeddingReport> {
    let same = |x: f64, y: f64, name: &str| {
        if x == y {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{name} must agree between source and target")))
        }
    };
    let order = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Hypothesis(what.to_string())) };
    let lhs = hl_norm(f, target, false)?;
    let source_norm = hl_norm(f, source, false)?;
    let (rhs, constant) = match variant {
        EmbeddingVariant::A => {
            same(source.a, target.a, "a")?;
            same(source.p, target.p, "p")?;
            same(source.q, target.q, "q")?;
            order(source.r <= target.r, "(A) needs r_source <= r_target")?;
            let norm_const = |r: f64| if r.is_infinite() { 1.0 } else { (source.p / r).powf(1.0 / r) };
            let c = norm_const(target.r) / norm_const(source.r);
            (c * source_norm, c)
        }
        EmbeddingVariant::B => {
            same(source.p, target.p, "p")?;
            same(source.q, target.q, "q")?;
            same(source.r, target.r, "r")?;
            order(target.a <= source.a, "(B) needs a_target <= a_source")?;
            // only the central ball has a negative index
            let c = (source.a - target.a).exp2();
            (c * source_norm, c)
        }
        EmbeddingVariant::C => {
            same(source.a, target.a, "a")?;
            same(source.q, target.q, "q")?;
            let (p1, p2, r1) = (target.p, source.p, target.r);
            order(p1 < p2 && p2.is_finite(), "(C) needs p_target < p_source < inf")?;
            let weak = LorentzParams::new(p2, f64::INFINITY)?;
            let denom = if r1.is_infinite() { 1.0 } else { (r1 / p1 - r1 / p2).powf(1.0 / r1) };
            let mut constant: f64 = 0.0;
            let mut entries = Vec::new();
            for (u, g) in annulus_profiles(f) {
                let c_u = annulus_measure(f.dim(), u).powf(1.0 / p1 - 1.0 / p2) / denom;
                constant = constant.max(c_u);
                entries.push((u, c_u * lorentz::quasi_norm(&g, weak)));
            }
            (WeightedSeq::new(entries)?.ell_norm(source.a, source.q), constant)
        }
        EmbeddingVariant::D => {
            same(source.a, target.a, "a")?;
            same(source.p, target.p, "p")?;
            same(source.r, target.r, "r")?;
            order(source.q <= target.q, "(D) needs q_source <= q_target")?;
            (source_norm, 1.0)
        }
    };
    let empirical = if source_norm == 0.0 { 0.0 } else { lhs / source_norm };
    Ok(EmbeddingReport { lhs, rhs, constant, empirical, pass: lhs <= rhs * (1.0 + 1e-9) })
}
