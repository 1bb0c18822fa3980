//! The size condition `|Tf(x)| <= C int |f(y)|/|x - y| dy` off the support,
//! and the annulus interaction bound
//! `2^{-uN} ||chi_{A_u}||_{L^{p,r}} ||chi_{A_v}||_{L^{p',r'}} <= C 2^{(N/p')(v-u)}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::annulus_measure;
use crate::lorentz::{conjugate, indicator_quasi_norm, LorentzParams};
use crate::operators::grid::GridFunction1D;
use crate::operators::hilbert::size_integral;
use crate::operators::Operator;

/// Allowed relative change of a constant under one refinement.
pub const DRIFT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SizeRatio {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `|Tf(x)|` against `int |f|/|x - y|` at one point off the support.
pub fn size_ratio_at(op: Operator, f: &GridFunction1D, x: f64) -> Result<SizeRatio> {
    if let Some(i) = f.cell_of(x) {
        if f.values()[i] != 0.0 {
            return Err(Error::InvalidParams(format!("x = {x} lies in the support")));
        }
    }
    let lhs = op.at(f, x).abs();
    let rhs = size_integral(f, x);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(SizeRatio { x, lhs, rhs, ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeReport {
    pub points: usize,
    pub max_ratio: f64,
    pub argmax: f64,
    pub refined_max_ratio: f64,
    pub drift: f64,
    pub pass: bool,
}

fn max_ratio_off_support(op: Operator, f: &GridFunction1D, margin: usize) -> Result<(usize, f64, f64)> {
    let support: Vec<usize> = (0..f.cells()).filter(|&i| f.values()[i] != 0.0).collect();
    if support.is_empty() {
        return Ok((f.cells(), 0.0, f64::NAN));
    }
    let tf = op.apply(f);
    let mut points = 0;
    let (mut best, mut argmax) = (0.0f64, f64::NAN);
    for i in 0..f.cells() {
        // distance in cells to the nearest support cell
        let k = support.partition_point(|&j| j < i);
        let left = (k > 0).then(|| i - support[k - 1]);
        let right = support.get(k).map(|&j| j - i);
        let dist = left.into_iter().chain(right).min().unwrap();
        if dist <= margin {
            continue;
        }
        points += 1;
        let x = f.center(i);
        let lhs = tf.values()[i].abs();
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / size_integral(f, x) };
        if ratio > best {
            best = ratio;
            argmax = x;
        }
    }
    if points == 0 {
        return Err(Error::InvalidParams(format!("no evaluation point lies more than {margin} cells off the support")));
    }
    Ok((points, best, argmax))
}

/// Largest size-condition ratio over cell centres more than `margin` cells from the
/// support, at the given grid and after one refinement.
pub fn size_condition_check(op: Operator, f: &GridFunction1D, margin: usize) -> Result<SizeReport> {
    let (points, max_ratio, argmax) = max_ratio_off_support(op, f, margin)?;
    let (_, refined_max_ratio, _) = max_ratio_off_support(op, &f.refine(), 2 * margin + 1)?;
    let drift = if max_ratio == 0.0 && refined_max_ratio == 0.0 {
        0.0
    } else {
        (refined_max_ratio - max_ratio).abs() / max_ratio
    };
    let pass = max_ratio.is_finite() && drift <= DRIFT_TOL;
    Ok(SizeReport { points, max_ratio, argmax, refined_max_ratio, drift, pass })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InteractionTerm {
    pub u: i32,
    pub v: i32,
    pub lhs: f64,
    /// `(N/p')(v - u)`.
    pub rhs_exponent: f64,
    /// `lhs / 2^{rhs_exponent}`.
    pub constant: f64,
}

fn interaction_hypotheses(params: LorentzParams) -> Result<()> {
    if !(params.p > 1.0 && params.p.is_finite() && params.r >= 1.0) {
        return Err(Error::Hypothesis(format!("needs 1 < p < inf and r >= 1, got p={}, r={}", params.p, params.r)));
    }
    Ok(())
}

pub fn annulus_interaction(u: i32, v: i32, dim: u32, params: LorentzParams) -> Result<InteractionTerm> {
    interaction_hypotheses(params)?;
    if u < -1 || v < -1 {
        return Err(Error::InvalidParams("annulus indices must be >= -1".into()));
    }
    let dual = LorentzParams { p: conjugate(params.p), r: conjugate(params.r) };
    let n = dim as f64;
    // the powers of two are combined in the exponent, so equality cases come out exact
    let log2_measure = |w: i32| annulus_measure(dim, w).log2();
    let log2_lhs = -(u as f64) * n + log2_measure(u) / params.p + log2_measure(v) / dual.p;
    let prefactor = indicator_quasi_norm(1.0, params) * indicator_quasi_norm(1.0, dual);
    let rhs_exponent = n / dual.p * (v - u) as f64;
    Ok(InteractionTerm {
        u,
        v,
        lhs: prefactor * log2_lhs.exp2(),
        rhs_exponent,
        constant: prefactor * (log2_lhs - rhs_exponent).exp2(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionScan {
    pub dim: u32,
    pub params: LorentzParams,
    pub window: (i32, i32),
    pub cells: usize,
    pub constant: f64,
    pub argmax: (i32, i32),
    pub min_constant: f64,
    pub pass: bool,
}

/// Tightest single constant over `u, v` in the window.
pub fn annulus_interaction_bound(dim: u32, params: LorentzParams, window: (i32, i32)) -> Result<InteractionScan> {
    interaction_hypotheses(params)?;
    let (lo, hi) = window;
    if lo < -1 || hi < lo {
        return Err(Error::InvalidParams(format!("bad window [{lo}, {hi}]")));
    }
    let (mut constant, mut argmax, mut min_constant, mut cells) = (0.0f64, (lo, lo), f64::INFINITY, 0);
    for u in lo..=hi {
        for v in lo..=hi {
            let term = annulus_interaction(u, v, dim, params)?;
            cells += 1;
            if term.constant > constant {
                constant = term.constant;
                argmax = (u, v);
            }
            min_constant = min_constant.min(term.constant);
        }
    }
    let pass = constant.is_finite() && constant > 0.0;
    Ok(InteractionScan { dim, params, window, cells, constant, argmax, min_constant, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn size_examples() {
        let chi = GridFunction1D::indicator(4.0, 256, -1.0, 1.0).unwrap();
        let h = size_ratio_at(Operator::Hilbert, &chi, 2.0).unwrap();
        assert_relative_eq!(h.ratio, 1.0 / std::f64::consts::PI, max_relative = 1e-13);
        let m = size_ratio_at(Operator::Maximal, &chi, 3.0).unwrap();
        assert_relative_eq!(m.ratio, 0.5 / 2f64.ln(), max_relative = 1e-13);
        assert!(size_ratio_at(Operator::Maximal, &chi, 0.0).is_err());
        for op in [Operator::Maximal, Operator::Hilbert] {
            assert!(size_condition_check(op, &chi, 4).unwrap().pass);
        }
        let zero = GridFunction1D::zero(4.0, 16).unwrap();
        let r = size_condition_check(Operator::Hilbert, &zero, 2).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn interaction_examples() {
        let p = LorentzParams::new(2.0, 2.0).unwrap();
        for u in 0..20 {
            assert_eq!(annulus_interaction(u, u, 1, p).unwrap().lhs, 1.0);
        }
        let t = annulus_interaction(2, 0, 1, p).unwrap();
        assert_eq!(t.lhs, 0.5);
        assert_eq!(t.constant, 1.0);
        let scan = annulus_interaction_bound(1, p, (-1, 60)).unwrap();
        assert!(scan.pass);
        assert!(scan.constant >= 1.0);
        assert!(annulus_interaction(0, 0, 1, LorentzParams::new(1.0, 1.0).unwrap()).is_err());
    }
}
