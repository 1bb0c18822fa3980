//! Radial step functions on R^N, their distribution functions and
//! decreasing rearrangements.
//!
//! A [`RadialStepFunction`] is constant on each shell
//! `{rho_{i-1} <= |x| < rho_i}` and vanishes outside the last radius, so its
//! distribution function is a finite sum of shell measures and its
//! rearrangement is obtained by sorting shells by `|value|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_radius, shell_measure};

/// Piecewise-constant-in-`|x|` function on R^N with bounded support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRadial", into = "RawRadial")]
pub struct RadialStepFunction {
    dim: u32,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawRadial {
    dim: u32,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawRadial> for RadialStepFunction {
    type Error = Error;
    fn try_from(raw: RawRadial) -> Result<Self> {
        RadialStepFunction::new(raw.dim, raw.breakpoints, raw.values)
    }
}

impl From<RadialStepFunction> for RawRadial {
    fn from(f: RadialStepFunction) -> Self {
        RawRadial { dim: f.dim, breakpoints: f.breakpoints, values: f.values }
    }
}

impl RadialStepFunction {
    /// Builds a function from radii `0 = rho_0 < ... < rho_m` and one value per shell.
    pub fn new(dim: u32, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFunction("dimension must be positive".into()));
        }
        if breakpoints.first() != Some(&0.0) {
            return Err(Error::InvalidFunction("breakpoints must start at 0".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite breakpoint or value".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFunction("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { dim, breakpoints, values })
    }

    pub fn zero(dim: u32) -> Self {
        Self { dim, breakpoints: vec![0.0], values: vec![] }
    }

    /// Indicator of the centred ball of the given measure.
    pub fn indicator_ball(dim: u32, measure: f64) -> Result<Self> {
        if measure <= 0.0 {
            return Ok(Self::zero(dim));
        }
        Self::new(dim, vec![0.0, ball_radius(dim, measure)], vec![1.0])
    }

    /// Indicator of the shell `{inner <= |x| < outer}`.
    pub fn indicator_shell(dim: u32, inner: f64, outer: f64) -> Result<Self> {
        if inner == 0.0 {
            Self::new(dim, vec![0.0, outer], vec![1.0])
        } else {
            Self::new(dim, vec![0.0, inner, outer], vec![0.0, 1.0])
        }
    }

    /// Stacks shells of prescribed measures outward from the origin.
    pub fn from_shells(dim: u32, shells: &[(f64, f64)]) -> Result<Self> {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::with_capacity(shells.len());
        let mut cumulative = 0.0;
        for &(measure, value) in shells {
            if measure <= 0.0 {
                return Err(Error::InvalidFunction("shell measures must be positive".into()));
            }
            cumulative += measure;
            breakpoints.push(ball_radius(dim, cumulative));
            values.push(value);
        }
        Self::new(dim, breakpoints, values)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterator over `(inner, outer, value)` shells.
    pub fn shells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| (w[0], w[1], v))
    }

    /// Iterator over `(shell measure, value)`.
    pub fn shell_pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let dim = self.dim;
        self.shells().map(move |(a, b, v)| (shell_measure(dim, a, b), v))
    }

    pub fn outer_radius(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn value_at_radius(&self, rho: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b <= rho) {
            0 => 0.0,
            i if i > self.values.len() => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Measure of the support `{f != 0}`.
    pub fn support_measure(&self) -> f64 {
        self.shell_pieces().filter(|&(_, v)| v != 0.0).map(|(m, _)| m).sum()
    }

    /// `mu({|f| > alpha})`.
    pub fn distribution(&self, alpha: f64) -> f64 {
        self.shell_pieces().filter(|&(_, v)| v.abs() > alpha).map(|(m, _)| m).sum()
    }

    pub fn rearrangement(&self) -> StepRearrangement {
        StepRearrangement::from_pieces(self.shell_pieces())
    }

    /// `int |f|`.
    pub fn l1_norm(&self) -> f64 {
        self.shell_pieces().map(|(m, v)| m * v.abs()).sum()
    }

    /// Plain `L^p` norm computed shell by shell, `p = inf` gives the sup.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()));
        }
        self.shell_pieces().map(|(m, v)| m * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            dim: self.dim,
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            dim: self.dim,
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Same function with extra breakpoints inserted (radii beyond the support extend it by zeros).
    pub fn refine(&self, radii: &[f64]) -> Self {
        let mut all: Vec<f64> = self.breakpoints.iter().copied().chain(radii.iter().copied().filter(|r| *r > 0.0 && r.is_finite())).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let values = all.windows(2).map(|w| self.value_at_radius(w[0])).collect();
        Self { dim: self.dim, breakpoints: all, values }
    }

    /// Pointwise combination on the common refinement of both breakpoint sets.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidFunction(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut all: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let values = all
            .windows(2)
            .map(|w| op(self.value_at_radius(w[0]), other.value_at_radius(w[0])))
            .collect();
        Ok(Self { dim: self.dim, breakpoints: all, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `int |f g|` on the common shell refinement.
    pub fn product_integral(&self, other: &Self) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| (a * b).abs())?.shell_pieces().map(|(m, v)| m * v).sum())
    }

    /// Restriction to `{inner <= |x| < outer}`.
    pub fn restrict(&self, inner: f64, outer: f64) -> Self {
        let refined = self.refine(&[inner, outer]);
        let values = refined
            .shells()
            .map(|(a, _, v)| if a >= inner && a < outer { v } else { 0.0 })
            .collect();
        Self { dim: self.dim, breakpoints: refined.breakpoints, values }.canonical()
    }

    /// Canonical form: adjacent equal shells merged, trailing zero shells dropped.
    pub fn canonical(&self) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        for (_, b, v) in self.shells() {
            if values.last() == Some(&v) {
                *breakpoints.last_mut().unwrap() = b;
            } else {
                values.push(v);
                breakpoints.push(b);
            }
        }
        while values.last() == Some(&0.0) {
            values.pop();
            breakpoints.pop();
        }
        Self { dim: self.dim, breakpoints, values }
    }
}

/// Nonincreasing right-continuous step function on `[0, inf)`.
///
/// Levels are strictly decreasing and strictly positive; the function
/// vanishes from the last knot on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRearrangement {
    knots: Vec<f64>,
    levels: Vec<f64>,
}

impl StepRearrangement {
    /// Rearranges a finite family of `(measure, value)` pieces of a function.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pieces: Vec<(f64, f64)> = pieces
            .into_iter()
            .map(|(m, v)| (m, v.abs()))
            .filter(|&(m, v)| m > 0.0 && v > 0.0)
            .collect();
        pieces.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut knots = vec![0.0];
        let mut levels: Vec<f64> = Vec::new();
        let mut cumulative = 0.0;
        for (m, v) in pieces {
            cumulative += m;
            if levels.last() == Some(&v) {
                *knots.last_mut().unwrap() = cumulative;
            } else {
                levels.push(v);
                knots.push(cumulative);
            }
        }
        Self { knots, levels }
    }

    /// Indicator of `[0, measure)`.
    pub fn indicator(measure: f64) -> Self {
        Self::from_pieces([(measure, 1.0)])
    }

    pub fn zero() -> Self {
        Self { knots: vec![0.0], levels: vec![] }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    /// `(t_{j-1}, t_j, w_j)` segments.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots.windows(2).zip(&self.levels).map(|(w, &l)| (w[0], w[1], l))
    }

    /// Measure of the support, `t_k`.
    pub fn support(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Essential supremum, `f*(0)`.
    pub fn sup(&self) -> f64 {
        self.levels.first().copied().unwrap_or(0.0)
    }

    /// `f*(t)`, right-continuous at knots.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|&k| k <= t);
        if i == 0 || i > self.levels.len() {
            0.0
        } else {
            self.levels[i - 1]
        }
    }

    /// `int_0^t f*`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, w) in self.segments() {
            if t <= a {
                break;
            }
            acc += w * (t.min(b) - a);
        }
        acc
    }

    /// `int_0^inf f*`.
    pub fn total_mass(&self) -> f64 {
        self.segments().map(|(a, b, w)| w * (b - a)).sum()
    }

    /// `f**(t) = (1/t) int_0^t f*`, `t > 0`.
    pub fn average(&self, t: f64) -> f64 {
        assert!(t > 0.0, "average rearrangement needs t > 0");
        self.integral_to(t) / t
    }

    /// `|{f* > alpha}|`.
    pub fn distribution(&self, alpha: f64) -> f64 {
        let j = self.levels.partition_point(|&w| w > alpha);
        self.knots[j]
    }

    /// `int (f* - c)_+`, the L^1 cost of truncating at height `c`.
    pub fn excess_above(&self, c: f64) -> f64 {
        self.segments().map(|(a, b, w)| (w - c).max(0.0) * (b - a)).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_pieces(self.segments().map(|(a, b, w)| (b - a, alpha * w)))
    }
}

/// `g**(t)` for `t > 0`.
pub fn average_rearrangement(g: &StepRearrangement, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    Ok(g.average(t))
}

/// Both sides of the rearrangement-of-sums bounds.
#[derive(Debug, Clone, Serialize)]
pub struct SumBoundReport {
    /// `(sum f_n)*(3t)`
    pub lhs: f64,
    /// `sum_n f_n**(t) + (1/t) int_{c_n t}^t f_n*`
    pub rhs_sharp: f64,
    /// `(sum f_n)*(t)`
    pub lhs_simple: f64,
    /// `2 sum_n f_n**(t/3)`
    pub rhs_simple: f64,
    pub pass: bool,
}

/// Checks `(sum f_n)*(3t) <= sum (f_n**(t) + (1/t) int_{c_n t}^t f_n*)` and
/// `(sum f_n)*(t) <= 2 sum f_n**(t/3)` for nonnegative step functions.
pub fn sum_bound_check(fs: &[RadialStepFunction], t: f64, cs: &[f64]) -> Result<SumBoundReport> {
    if fs.is_empty() {
        return Err(Error::InvalidParams("need at least one function".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    if cs.len() != fs.len() || cs.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidParams("need one positive weight per function".into()));
    }
    if (cs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams("weights must sum to 1".into()));
    }
    if fs.iter().any(|f| f.values().iter().any(|&v| v < 0.0)) {
        return Err(Error::InvalidFunction("sum bounds need nonnegative functions".into()));
    }

    let mut sum = fs[0].clone();
    for f in &fs[1..] {
        sum = sum.add(f)?;
    }
    let total = sum.rearrangement();
    let rearranged: Vec<StepRearrangement> = fs.iter().map(|f| f.rearrangement()).collect();

    let lhs = total.value_at(3.0 * t);
    let rhs_sharp: f64 = rearranged
        .iter()
        .zip(cs)
        .map(|(g, &c)| g.average(t) + (g.integral_to(t) - g.integral_to(c * t)) / t)
        .sum();
    let lhs_simple = total.value_at(t);
    let rhs_simple = 2.0 * rearranged.iter().map(|g| g.average(t / 3.0)).sum::<f64>();
    let slack = 1e-12 * (1.0 + rhs_sharp.abs().max(rhs_simple.abs()));
    Ok(SumBoundReport {
        lhs,
        rhs_sharp,
        lhs_simple,
        rhs_simple,
        pass: lhs <= rhs_sharp + slack && lhs_simple <= rhs_simple + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_shell() -> RadialStepFunction {
        RadialStepFunction::from_shells(1, &[(0.5, 3.0), (2.0, 1.0)]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let f = two_shell();
        assert_eq!(f.distribution(2.0), 0.5);
        assert_eq!(f.distribution(0.5), 2.5);
        assert_eq!(f.distribution(3.0), 0.0);
    }

    #[test]
    fn rearrangement_examples() {
        let g = two_shell().rearrangement();
        assert_eq!(g.knots(), &[0.0, 0.5, 2.5]);
        assert_eq!(g.levels(), &[3.0, 1.0]);
        assert_eq!(g.value_at(0.0), 3.0);
        assert_eq!(g.value_at(0.5), 1.0);
        assert_eq!(g.value_at(2.5), 0.0);

        assert!(RadialStepFunction::zero(2).rearrangement().is_zero());
        assert_eq!(RadialStepFunction::zero(2).rearrangement().value_at(0.0), 0.0);
    }

    #[test]
    fn signed_shells_merge_by_modulus() {
        let f = RadialStepFunction::from_shells(1, &[(1.0, -2.0), (1.0, 2.0)]).unwrap();
        let g = f.rearrangement();
        assert_eq!(g.levels(), &[2.0]);
        assert_eq!(g.knots(), &[0.0, 2.0]);
        // brute-force inversion of the distribution function
        for k in 0..400 {
            let s = k as f64 * 0.01;
            let alphas = (0..=4000).map(|j| j as f64 * 1e-3);
            let inv = alphas.filter(|&a| f.distribution(a) <= s).fold(f64::INFINITY, f64::min);
            assert!((inv - g.value_at(s)).abs() <= 1e-3, "s={s}");
        }
    }

    #[test]
    fn average_examples() {
        let g = two_shell().rearrangement();
        assert_eq!(average_rearrangement(&g, 1.0).unwrap(), 2.0);
        let ind = StepRearrangement::indicator(0.75);
        assert_eq!(ind.average(0.3), 1.0);
        assert_eq!(ind.average(0.75), 1.0);
        assert_eq!(ind.average(1.5), 0.5);
        assert!(average_rearrangement(&g, 0.0).is_err());
    }

    #[test]
    fn sum_bound_single_term() {
        let f = two_shell();
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            let rep = sum_bound_check(std::slice::from_ref(&f), t, &[1.0]).unwrap();
            assert!(rep.pass);
            assert_eq!(rep.rhs_sharp, f.rearrangement().average(t));
        }
    }

    #[test]
    fn sum_bound_two_indicators() {
        let chi = RadialStepFunction::indicator_ball(1, 1.0).unwrap();
        let rep = sum_bound_check(&[chi.clone(), chi], 1.0 / 3.0, &[0.5, 0.5]).unwrap();
        // (2 chi)*(1) = 0 by right-continuity; each term contributes 1 + 3 (1/3 - 1/6)
        assert_eq!(rep.lhs, 0.0);
        assert!((rep.rhs_sharp - 3.0).abs() < 1e-12);
        assert_eq!(rep.lhs_simple, 2.0);
        assert!((rep.rhs_simple - 4.0).abs() < 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn sum_bound_rejects_bad_input() {
        let neg = RadialStepFunction::from_shells(1, &[(1.0, -1.0)]).unwrap();
        assert!(sum_bound_check(&[neg], 1.0, &[1.0]).is_err());
        let f = two_shell();
        assert!(sum_bound_check(&[f.clone(), f], 1.0, &[0.5, 0.6]).is_err());
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(RadialStepFunction::new(1, vec![0.0, 1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(RadialStepFunction::new(1, vec![0.5, 1.0], vec![1.0]).is_err());
        assert!(RadialStepFunction::new(1, vec![0.0, 1.0], vec![]).is_err());
        let json = r#"{"dim":1,"breakpoints":[0,2,1],"values":[1,1]}"#;
        assert!(serde_json::from_str::<RadialStepFunction>(json).is_err());
    }

    #[test]
    fn restrict_and_canonical() {
        let f = RadialStepFunction::new(1, vec![0.0, 1.0, 3.0], vec![2.0, 5.0]).unwrap();
        let r = f.restrict(0.5, 2.0);
        assert_eq!(r.breakpoints(), &[0.0, 0.5, 1.0, 2.0]);
        assert_eq!(r.values(), &[0.0, 2.0, 5.0]);
        let back = f.refine(&[0.5, 2.0, 8.0]).canonical();
        assert_eq!(back, f);
    }

    #[test]
    fn excess_matches_direct_sum() {
        let g = two_shell().rearrangement();
        assert_eq!(g.excess_above(0.0), g.total_mass());
        assert_eq!(g.excess_above(2.0), 0.5);
        assert_eq!(g.excess_above(5.0), 0.0);
    }
}
