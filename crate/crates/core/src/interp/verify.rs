//! Band-stability checks of interpolation identities: for every member the
//! ratio of its interpolation norm to the norm of the predicted space is
//! computed, and the suite passes when all ratios fit in a band of bounded
//! width and are unchanged when the member is doubled.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herz::{hl_norm, HerzParams};
use crate::interp::kfunc::{AnnularCurve, Base, CoupleSpec, L1LinfCurve, SeqCurve};
use crate::interp::norm::{interpolation_norm, InterpolationParams};
use crate::interp::retract::retract_l;
use crate::interp::seq::WeightedSeq;
use crate::lorentz::{lorentz_star_norm, LorentzParams, STAR_TOL};
use crate::rearrange::RadialStepFunction;

/// Default bound on `max ratio / min ratio`.
pub const DEFAULT_STABILITY: f64 = 50.0;
/// Relative agreement required between the ratios of `f` and `2f`.
pub const SCALE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpSuite {
    /// `(l_{q0}^{a0}, l_{q1}^{a1})_{theta,q} = l_q^a`, `a0 != a1`.
    SeqA,
    /// `(l_{q0}^a, l_{q1}^a)_{theta,q} = l_q^a`, `1/q = (1-theta)/q0 + theta/q1`.
    SeqQ,
    /// `(L^1, L^inf)_{theta,q} = L^{p,q}`, `p = 1/(1-theta)`.
    Lorentz,
    /// Herz couples in `a` over a common Lorentz base, through the retract.
    Hl1,
    /// Herz couples in `q` over a common Lorentz base, through the retract.
    Hl2,
    /// `(K_{1,q0}^{a0}, K_{inf,q1}^{a1})_{theta,q} = HL_{p,q}^{a,q}`.
    Hl3,
    /// The same couple with `q0 = q1 = q` and `a0 = a1 = a`.
    Hl4,
}

impl InterpSuite {
    pub const ALL: [InterpSuite; 7] = [Self::SeqA, Self::SeqQ, Self::Lorentz, Self::Hl1, Self::Hl2, Self::Hl3, Self::Hl4];

    pub fn name(self) -> &'static str {
        match self {
            Self::SeqA => "seq-a",
            Self::SeqQ => "seq-q",
            Self::Lorentz => "lorentz",
            Self::Hl1 => "hl-1",
            Self::Hl2 => "hl-2",
            Self::Hl3 => "hl-3",
            Self::Hl4 => "hl-4",
        }
    }

    fn takes_sequences(self) -> bool {
        matches!(self, Self::SeqA | Self::SeqQ)
    }
}

impl fmt::Display for InterpSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterpSuite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown interpolation suite `{s}`")))
    }
}

/// Parameters of an interpolation suite. Fields a suite does not use are ignored;
/// `q` is derived from `q0, q1` where the identity fixes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpSetup {
    pub theta: f64,
    pub a0: f64,
    pub a1: f64,
    pub q0: f64,
    pub q1: f64,
    pub q: Option<f64>,
    /// Lorentz base for `hl-1`, `hl-2` and for retracting functions in the sequence suites.
    pub base: LorentzParams,
    pub t_bound: f64,
    pub density: usize,
    pub stability: f64,
}

impl Default for InterpSetup {
    fn default() -> Self {
        Self {
            theta: 0.5,
            a0: 0.0,
            a1: 1.0,
            q0: 1.0,
            q1: 1.0,
            q: None,
            base: LorentzParams { p: 2.0, r: 2.0 },
            t_bound: 40.0,
            density: 16,
            stability: DEFAULT_STABILITY,
        }
    }
}

fn harmonic_q(theta: f64, q0: f64, q1: f64) -> f64 {
    1.0 / ((1.0 - theta) / q0 + theta / q1)
}

fn close(x: f64, y: f64) -> bool {
    x == y || (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

/// The couple, and the target space `(a, q)` with, for function targets, its Herz exponents.
#[derive(Debug, Clone, Copy)]
struct Resolved {
    couple: CoupleSpec,
    interp: InterpolationParams,
    a: f64,
    q: f64,
    /// `p = 1/(1-theta)` for the suites built on `(L^1, L^inf)`.
    p: f64,
}

fn hypothesis(msg: String) -> Error {
    Error::Hypothesis(msg)
}

fn resolve(suite: InterpSuite, s: &InterpSetup) -> Result<Resolved> {
    if !(s.theta > 0.0 && s.theta < 1.0) {
        return Err(hypothesis(format!("theta must lie in (0,1), got {}", s.theta)));
    }
    if !(s.stability >= 1.0) {
        return Err(Error::InvalidParams(format!("stability factor must be >= 1, got {}", s.stability)));
    }
    if s.q0 < 1.0 || s.q1 < 1.0 {
        return Err(hypothesis(format!(
            "q0 = {}, q1 = {}: the split optimizer is only convex for q0, q1 >= 1",
            s.q0, s.q1
        )));
    }
    let theta = s.theta;
    let a = (1.0 - theta) * s.a0 + theta * s.a1;
    let harmonic = harmonic_q(theta, s.q0, s.q1);
    let fixed_q = |what: &str| -> Result<f64> {
        match s.q {
            Some(q) if !close(q, harmonic) => {
                Err(hypothesis(format!("{what}: q must equal the harmonic mean {harmonic}, got {q}")))
            }
            _ => Ok(harmonic),
        }
    };
    let free_q = || s.q.ok_or_else(|| Error::InvalidParams("this suite needs an explicit q".into()));
    let p = 1.0 / (1.0 - theta);
    let (a0, a1, q0, q1, q, base) = match suite {
        InterpSuite::SeqA | InterpSuite::Hl1 => {
            if s.a0 == s.a1 {
                return Err(hypothesis("a0 and a1 must differ".into()));
            }
            (s.a0, s.a1, s.q0, s.q1, free_q()?, Base::lorentz(s.base))
        }
        InterpSuite::SeqQ | InterpSuite::Hl2 => {
            if s.a0 != s.a1 {
                return Err(hypothesis(format!("a0 = {} and a1 = {} must coincide", s.a0, s.a1)));
            }
            (s.a0, s.a0, s.q0, s.q1, fixed_q("q-interpolation")?, Base::lorentz(s.base))
        }
        InterpSuite::Lorentz => (0.0, 1.0, 1.0, 1.0, free_q()?, Base::L1Linf),
        InterpSuite::Hl3 => {
            if s.q0.is_infinite() || s.q1.is_infinite() {
                return Err(hypothesis("q0 and q1 must be finite".into()));
            }
            (s.a0, s.a1, s.q0, s.q1, fixed_q("hl-3")?, Base::L1Linf)
        }
        InterpSuite::Hl4 => {
            if s.a0 != s.a1 || s.q0 != s.q1 {
                return Err(hypothesis("needs a0 = a1 and q0 = q1".into()));
            }
            if s.q0.is_infinite() {
                return Err(hypothesis("q must be finite".into()));
            }
            if let Some(q) = s.q {
                if !close(q, s.q0) {
                    return Err(hypothesis(format!("q must equal q0 = {}, got {q}", s.q0)));
                }
            }
            (s.a0, s.a0, s.q0, s.q0, s.q0, Base::L1Linf)
        }
    };
    let couple = CoupleSpec::new(a0, q0, a1, q1, base)?;
    let interp = InterpolationParams::with_grid(theta, q, s.t_bound, s.density)?;
    if matches!(suite, InterpSuite::Lorentz | InterpSuite::Hl3 | InterpSuite::Hl4) {
        // the starred Lorentz norm needs r >= 1
        if q < 1.0 {
            return Err(hypothesis(format!("target L^{{{p},{q}}} needs q >= 1")));
        }
    }
    Ok(Resolved { couple, interp, a, q, p })
}

/// An element interpolated by a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Member {
    Seq(WeightedSeq),
    Func(RadialStepFunction),
}

impl Member {
    fn doubled(&self) -> Self {
        match self {
            Member::Seq(y) => Member::Seq(y.scale(2.0)),
            Member::Func(f) => Member::Func(f.scale(2.0)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberResult {
    pub index: usize,
    pub interp: f64,
    pub interp_lower: f64,
    pub interp_upper: f64,
    pub target: f64,
    pub ratio: f64,
    pub doubled_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: InterpSuite,
    pub setup: InterpSetup,
    /// `(a, q)` of the predicted space, and `p` for the suites built on `(L^1, L^inf)`.
    pub target_a: f64,
    pub target_q: f64,
    pub target_p: Option<f64>,
    pub members: Vec<MemberResult>,
    /// Members skipped because both norms vanish.
    pub skipped: Vec<usize>,
    pub band: (f64, f64),
    pub band_ratio: f64,
    pub max_scale_dev: f64,
    pub pass: bool,
}

fn evaluate(suite: InterpSuite, r: &Resolved, setup: &InterpSetup, member: &Member) -> Result<(f64, f64, f64, f64)> {
    let (n, target) = match (suite, member) {
        (InterpSuite::SeqA | InterpSuite::SeqQ, Member::Seq(y)) => {
            let n = interpolation_norm(&SeqCurve::new(y.clone(), r.couple)?, r.interp)?;
            (n, y.ell_norm(r.a, r.q))
        }
        (InterpSuite::SeqA | InterpSuite::SeqQ, Member::Func(f)) => {
            let y = retract_l(f, setup.base)?.scores;
            let n = interpolation_norm(&SeqCurve::new(y.clone(), r.couple)?, r.interp)?;
            (n, y.ell_norm(r.a, r.q))
        }
        (InterpSuite::Lorentz, Member::Func(f)) => {
            let n = interpolation_norm(&L1LinfCurve::new(f), r.interp)?;
            (n, lorentz_star_norm(f, LorentzParams::new(r.p, r.q)?, STAR_TOL)?)
        }
        (InterpSuite::Hl1 | InterpSuite::Hl2, Member::Func(f)) => {
            // K of the retract in the sequence couple is K of f in the Herz couple
            let y = retract_l(f, setup.base)?.scores;
            let n = interpolation_norm(&SeqCurve::new(y, r.couple)?, r.interp)?;
            let params = HerzParams::new(r.a, setup.base.p, r.q, setup.base.r)?;
            (n, hl_norm(f, params, false)?)
        }
        (InterpSuite::Hl3 | InterpSuite::Hl4, Member::Func(f)) => {
            let n = interpolation_norm(&AnnularCurve::new(f, r.couple)?, r.interp)?;
            (n, hl_norm(f, HerzParams::new(r.a, r.p, r.q, r.q)?, true)?)
        }
        (_, Member::Seq(_)) => {
            return Err(Error::InvalidParams(format!("suite {suite} interpolates functions, got a sequence")));
        }
    };
    Ok((n.value, n.lower, n.upper, target))
}

/// Ratios of interpolation norm to predicted norm over `members`.
pub fn verify_interpolation(suite: InterpSuite, setup: &InterpSetup, members: &[Member]) -> Result<VerifyReport> {
    let resolved = resolve(suite, setup)?;
    if members.is_empty() {
        return Err(Error::InvalidParams("empty corpus".into()));
    }
    if !suite.takes_sequences() && members.iter().any(|m| matches!(m, Member::Seq(_))) {
        return Err(Error::InvalidParams(format!("suite {suite} interpolates functions, got a sequence")));
    }
    let rows: Vec<Option<MemberResult>> = members
        .par_iter()
        .enumerate()
        .map(|(index, m)| -> Result<Option<MemberResult>> {
            let (value, lower, upper, target) = evaluate(suite, &resolved, setup, m)?;
            if value == 0.0 && target == 0.0 {
                return Ok(None);
            }
            let (v2, _, _, t2) = evaluate(suite, &resolved, setup, &m.doubled())?;
            Ok(Some(MemberResult {
                index,
                interp: value,
                interp_lower: lower,
                interp_upper: upper,
                target,
                ratio: value / target,
                doubled_ratio: v2 / t2,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect();
    let members: Vec<MemberResult> = rows.into_iter().flatten().collect();

    let lo = members.iter().map(|m| m.ratio).fold(f64::INFINITY, f64::min);
    let hi = members.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let band_ratio = if members.is_empty() { 1.0 } else { hi / lo };
    let max_scale_dev = members
        .iter()
        .map(|m| (m.doubled_ratio - m.ratio).abs() / m.ratio)
        .fold(0.0, |acc: f64, x| if x.is_nan() { f64::INFINITY } else { acc.max(x) });
    let finite = members.iter().all(|m| m.ratio.is_finite() && m.ratio > 0.0);
    let pass = finite && band_ratio <= setup.stability && max_scale_dev <= SCALE_TOL;
    let uses_p = matches!(suite, InterpSuite::Lorentz | InterpSuite::Hl3 | InterpSuite::Hl4);
    Ok(VerifyReport {
        suite,
        setup: *setup,
        target_a: resolved.a,
        target_q: resolved.q,
        target_p: uses_p.then_some(resolved.p),
        members,
        skipped,
        band: (lo, hi),
        band_ratio,
        max_scale_dev,
        pass,
    })
}
