//! K-functionals `K(t, y) = inf_{y = y0 + y1} ||y0||_0 + t ||y1||_1`.
//!
//! Every couple handled here decomposes coordinatewise: coordinate `u` can
//! move cost from side 0 to side 1 along a convex nonincreasing
//! piecewise-linear tradeoff `phi_u(z)`, where `z` is the side-1 cost
//! (already multiplied by `t`) and `phi_u(z)` the cheapest side-0 cost that
//! goes with it. The K-functional is then
//!
//! `min_z ||(phi_u(z_u))_u||_{q0} + ||(z_u)_u||_{q1}`,  `0 <= z_u <= Z_u`,
//!
//! a convex program for `q0, q1 >= 1`.
//!
//! * scalar splits `y_u = s_u y_u + (1 - s_u) y_u` give the two-point curve
//!   `(0, 2^{u a0} y_u) -- (t 2^{u a1} y_u, 0)`;
//! * the annular `(L^1, L^inf)` couple truncates `f chi_{A_u}` at height `c`,
//!   giving `z = t 2^{u a1} c` and `phi = 2^{u a0} int (|f_u| - c)_+`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herz::annulus_profiles;
use crate::interp::seq::WeightedSeq;
use crate::lorentz::{conjugate, LorentzParams};
use crate::rearrange::{RadialStepFunction, StepRearrangement};

/// Relative accuracy the solver certifies.
pub const K_TOL: f64 = 1e-8;

/// The space the sequence entries live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Base {
    Lorentz { p: f64, r: f64 },
    /// `L^1` on side 0 and `L^inf` on side 1.
    L1Linf,
}

impl Base {
    pub fn lorentz(params: LorentzParams) -> Self {
        Base::Lorentz { p: params.p, r: params.r }
    }
}

/// `(l_{q0}^{a0}(B_0), l_{q1}^{a1}(B_1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupleSpec {
    pub a0: f64,
    pub q0: f64,
    pub a1: f64,
    pub q1: f64,
    pub base: Base,
}

impl CoupleSpec {
    pub fn new(a0: f64, q0: f64, a1: f64, q1: f64, base: Base) -> Result<Self> {
        if !(a0.is_finite() && a1.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite".into()));
        }
        if !(q0 > 0.0 && q1 > 0.0) {
            return Err(Error::InvalidParams(format!("need q0, q1 > 0, got {q0}, {q1}")));
        }
        if let Base::Lorentz { p, r } = base {
            LorentzParams::new(p, r)?;
        }
        Ok(Self { a0, q0, a1, q1, base })
    }

    /// Sequence couple; the base only matters when functions are retracted.
    pub fn sequence(a0: f64, q0: f64, a1: f64, q1: f64) -> Result<Self> {
        Self::new(a0, q0, a1, q1, Base::L1Linf)
    }

    fn require_convex(&self) -> Result<()> {
        if self.q0 < 1.0 || self.q1 < 1.0 {
            return Err(Error::InvalidParams(format!(
                "K-functional solver needs q0, q1 >= 1 (got {}, {}); the split problem is not convex below 1",
                self.q0, self.q1
            )));
        }
        Ok(())
    }
}

/// Convex nonincreasing piecewise-linear tradeoff through `(z_k, phi_k)`,
/// `z_0 = 0`, ending at `(Z, 0)`.
#[derive(Debug, Clone)]
pub(crate) struct Tradeoff {
    z: Vec<f64>,
    phi: Vec<f64>,
}

impl Tradeoff {
    fn linear(alpha: f64, beta: f64) -> Self {
        Self { z: vec![0.0, beta], phi: vec![alpha, 0.0] }
    }

    fn zmax(&self) -> f64 {
        *self.z.last().unwrap()
    }

    fn phi0(&self) -> f64 {
        self.phi[0]
    }

    fn scaled(&self, s: f64) -> Self {
        Self { z: self.z.iter().map(|x| x / s).collect(), phi: self.phi.iter().map(|x| x / s).collect() }
    }

    fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.phi[0];
        }
        if z >= self.zmax() {
            return 0.0;
        }
        let k = self.z.partition_point(|&x| x <= z) - 1;
        let (z0, z1, p0, p1) = (self.z[k], self.z[k + 1], self.phi[k], self.phi[k + 1]);
        p0 + (p1 - p0) * ((z - z0) / (z1 - z0))
    }

    /// `min { z : phi(z) <= rho }`.
    fn inverse(&self, rho: f64) -> f64 {
        if rho >= self.phi[0] {
            return 0.0;
        }
        if rho <= 0.0 {
            return self.zmax();
        }
        // phi is strictly decreasing on [0, Z]
        let k = self.phi.partition_point(|&p| p > rho);
        let (z0, z1, p0, p1) = (self.z[k - 1], self.z[k], self.phi[k - 1], self.phi[k]);
        z0 + (z1 - z0) * ((p0 - rho) / (p0 - p1))
    }

    fn slope(&self, k: usize) -> f64 {
        (self.phi[k] - self.phi[k + 1]) / (self.z[k + 1] - self.z[k])
    }

    /// Minimizer of `lambda phi(z)^{q0}/q0 + z^{q1}/q1` over `[0, Z]`.
    fn scalarized(&self, lambda: f64, q0: f64, q1: f64) -> f64 {
        for k in 0..self.z.len() - 1 {
            let (zk, zk1, pk) = (self.z[k], self.z[k + 1], self.phi[k]);
            let sigma = self.slope(k);
            let deriv = |z: f64, p: f64| -lambda * sigma * p.powf(q0 - 1.0) + z.powf(q1 - 1.0);
            if deriv(zk, pk) >= 0.0 {
                return zk;
            }
            if deriv(zk1, self.phi[k + 1]) <= 0.0 {
                continue;
            }
            return segment_root(zk, zk1, pk, sigma, lambda, q0, q1);
        }
        self.zmax()
    }
}

/// Root of `z^{q1-1} = lambda sigma (p_k - sigma (z - z_k))^{q0-1}` in `(z_k, z_{k+1})`.
fn segment_root(zk: f64, zk1: f64, pk: f64, sigma: f64, lambda: f64, q0: f64, q1: f64) -> f64 {
    let clamp = |z: f64| z.clamp(zk, zk1);
    let ls = lambda * sigma;
    if q0 == 1.0 {
        return clamp(ls.powf(1.0 / (q1 - 1.0)));
    }
    if q1 == 1.0 {
        let p = ls.powf(-1.0 / (q0 - 1.0));
        return clamp(zk + (pk - p) / sigma);
    }
    if q0 == 2.0 && q1 == 2.0 {
        return clamp(ls * (pk + sigma * zk) / (1.0 + ls * sigma));
    }
    let g = |z: f64| z.powf(q1 - 1.0) - ls * (pk - sigma * (z - zk)).powf(q0 - 1.0);
    let dg = |z: f64| {
        (q1 - 1.0) * z.powf(q1 - 2.0) + ls * sigma * (q0 - 1.0) * (pk - sigma * (z - zk)).powf(q0 - 2.0)
    };
    let (mut lo, mut hi) = (zk, zk1);
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gz = g(z);
        if gz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if gz == 0.0 {
            break;
        }
        let newton = z - gz / dg(z);
        if newton > lo && newton < hi && newton.is_finite() {
            // newton approaches from one side, so the bracket alone need not shrink
            let done = (newton - z).abs() <= 2.0 * f64::EPSILON * z;
            z = newton;
            if done {
                break;
            }
        } else {
            z = 0.5 * (lo + hi);
        }
    }
    z
}

fn lq_norm(xs: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        xs.fold(0.0, f64::max)
    } else if q == 1.0 {
        xs.sum()
    } else {
        xs.map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo <= rel_width * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd { (c, fc) } else { (d, fd) }
}

/// Minimizes a convex function of one variable given a sorted list of points
/// containing all its kinks: the grid minimum, then golden refinement on both
/// neighbouring cells.
fn convex_over_candidates(g: impl Fn(f64) -> f64, candidates: &[f64]) -> f64 {
    let values: Vec<f64> = candidates.iter().map(|&x| g(x)).collect();
    let (k, &best) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mut best = best;
    if k > 0 {
        best = best.min(golden_min(&g, candidates[k - 1], candidates[k], 1e-15).1);
    }
    if k + 1 < candidates.len() {
        best = best.min(golden_min(&g, candidates[k], candidates[k + 1], 1e-15).1);
    }
    best
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Minimizes `||phi(z)||_{q0} + ||z||_{q1}` over the box.
pub(crate) fn solve(curves: &[Tradeoff], q0: f64, q1: f64) -> Result<f64> {
    if q0 < 1.0 || q1 < 1.0 {
        return Err(Error::InvalidParams("K-functional solver needs q0, q1 >= 1".into()));
    }
    let curves: Vec<&Tradeoff> = curves.iter().filter(|c| c.phi0() > 0.0 && c.zmax() > 0.0).collect();
    if curves.is_empty() {
        return Ok(0.0);
    }
    // normalizing makes the search scale-free and exactly homogeneous under powers of two
    let scale = curves.iter().map(|c| c.phi0().max(c.zmax())).fold(0.0, f64::max);
    let curves: Vec<Tradeoff> = curves.iter().map(|c| c.scaled(scale)).collect();
    let value = if q0 == 1.0 && q1 == 1.0 {
        curves
            .iter()
            .map(|c| c.z.iter().zip(&c.phi).map(|(z, p)| z + p).fold(f64::INFINITY, f64::min))
            .sum()
    } else if q0.is_infinite() {
        let g = |rho: f64| rho + lq_norm(curves.iter().map(|c| c.inverse(rho)), q1);
        let candidates = sorted_unique(curves.iter().flat_map(|c| c.phi.iter().copied()).collect());
        convex_over_candidates(g, &candidates)
    } else if q1.is_infinite() {
        let h = |sigma: f64| sigma + lq_norm(curves.iter().map(|c| c.eval(sigma)), q0);
        let candidates = sorted_unique(curves.iter().flat_map(|c| c.z.iter().copied()).collect());
        convex_over_candidates(h, &candidates)
    } else {
        lambda_path(&curves, q0, q1)?
    };
    Ok(value * scale)
}

fn objective(curves: &[Tradeoff], z: &[f64], q0: f64, q1: f64) -> f64 {
    lq_norm(curves.iter().zip(z).map(|(c, &x)| c.eval(x)), q0) + lq_norm(z.iter().copied(), q1)
}

/// Finite `q0, q1`, not both 1. Every minimizer is Pareto optimal for the
/// convex pair `(sum phi^{q0}, sum z^{q1})`, hence a minimizer of
/// `lambda phi^{q0}/q0 + z^{q1}/q1` for some `lambda`; along that path the
/// objective is a convex function of the monotone quantity `||phi||_{q0}`,
/// so it is unimodal in `log lambda`.
fn lambda_path(curves: &[Tradeoff], q0: f64, q1: f64) -> Result<f64> {
    let path = |ln_lambda: f64| -> Vec<f64> {
        let lambda = ln_lambda.exp();
        curves.iter().map(|c| c.scalarized(lambda, q0, q1)).collect()
    };
    let f = |ln_lambda: f64| objective(curves, &path(ln_lambda), q0, q1);

    let centres: Vec<f64> = curves.iter().map(|c| q1 * c.zmax().ln() - q0 * c.phi0().ln()).collect();
    let lo = centres.iter().copied().fold(f64::INFINITY, f64::min) - 40.0;
    let hi = centres.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 40.0;

    let zeros = vec![0.0; curves.len()];
    let full: Vec<f64> = curves.iter().map(|c| c.zmax()).collect();

    let (f_zeros, f_full) = (objective(curves, &zeros, q0, q1), objective(curves, &full, q0, q1));
    let (mut best, mut best_z) = if f_zeros <= f_full { (f_zeros, zeros.clone()) } else { (f_full, full.clone()) };
    // any multipliers give a valid bound; the corners certify optima with an empty side
    let corner_lower = dual_bound(curves, &zeros, q0, q1).max(dual_bound(curves, &full, q0, q1));
    let certified = |best: f64, z: &[f64]| best - corner_lower.max(dual_bound(curves, z, q0, q1)) <= K_TOL * best;
    for points in [12usize, 512] {
        let n = if points > 100 { points.max((hi - lo).ceil() as usize + 1) } else { points };
        let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let samples: Vec<(f64, Option<f64>)> = grid
            .iter()
            .map(|&x| {
                let z = path(x);
                (objective(curves, &z, q0, q1), slope_sign(curves, &z, x, q0, q1))
            })
            .collect();
        let (k, _) = samples.iter().enumerate().min_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).unwrap();
        // along the path the objective moves with the sign of the stationarity residual,
        // which also brackets optima where the path stalls on a kink and the objective is flat
        let crossings = (1..n).filter(|&i| matches!((samples[i - 1].1, samples[i].1), (Some(x), Some(y)) if x < 0.0 && y >= 0.0));
        let bracket = crossings.min_by(|&i, &j| samples[i].0.min(samples[i - 1].0).total_cmp(&samples[j].0.min(samples[j - 1].0)));
        if let Some(i) = bracket {
            if let Some(x) = stationary_point(&path, curves, grid[i - 1], grid[i], q0, q1) {
                let z = path(x);
                let fx = objective(curves, &z, q0, q1);
                // ties within rounding go to the stationary point, whose certificate is tight
                if fx <= best * (1.0 + 1e-13) {
                    best = best.min(fx);
                    best_z = z;
                }
            }
        }
        if certified(best, &best_z) {
            return Ok(best);
        }
        let (a, b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n - 1)]);
        let (x, fx) = golden_min(f, a, b, 1e-14);
        if fx < best {
            best = fx;
            best_z = path(x);
        }
        if certified(best, &best_z) {
            return Ok(best);
        }
    }
    Err(Error::NonConvergence { best_upper: best })
}

/// `ln lambda - ln(N1^{q1-1} / N0^{q0-1})` at the path point `z(lambda)`; it has the
/// sign of the objective's derivative in `ln lambda` wherever the path moves.
fn slope_sign(curves: &[Tradeoff], z: &[f64], ln_lambda: f64, q0: f64, q1: f64) -> Option<f64> {
    let n0 = lq_norm(curves.iter().zip(z).map(|(c, &v)| c.eval(v)), q0);
    let n1 = lq_norm(z.iter().copied(), q1);
    (n0 > 0.0 && n1 > 0.0).then(|| ln_lambda - ((q1 - 1.0) * n1.ln() - (q0 - 1.0) * n0.ln()))
}

/// Root of [`slope_sign`] along the path inside a sign-changing bracket.
fn stationary_point(
    path: &impl Fn(f64) -> Vec<f64>,
    curves: &[Tradeoff],
    mut lo: f64,
    mut hi: f64,
    q0: f64,
    q1: f64,
) -> Option<f64> {
    let h = |x: f64| slope_sign(curves, &path(x), x, q0, q1);
    let (mut h_lo, mut h_hi) = (h(lo)?, h(hi)?);
    if !(h_lo < 0.0 && h_hi > 0.0) {
        return None;
    }
    // Illinois regula falsi, with a bisection step whenever the bracket stalls
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mut x = (lo * h_hi - hi * h_lo) / (h_hi - h_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let hx = h(x)?;
        if hx == 0.0 {
            return Some(x);
        }
        if hx > 0.0 {
            hi = x;
            h_hi = hx;
            if side == 1 {
                h_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            h_lo = hx;
            if side == -1 {
                h_hi *= 0.5;
            }
            side = -1;
        }
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let hm = h(mid)?;
            if hm > 0.0 {
                hi = mid;
                h_hi = hm;
            } else {
                lo = mid;
                h_lo = hm;
            }
            side = 0;
        }
    }
    Some(if h_hi < -h_lo { hi } else { lo })
}

/// Weak-duality lower bound `sum_u min_z mu_u phi_u(z) + nu_u z` over multipliers
/// in the dual unit balls, built from the norm gradients at `z`.
fn dual_bound(curves: &[Tradeoff], z: &[f64], q0: f64, q1: f64) -> f64 {
    let phi: Vec<f64> = curves.iter().zip(z).map(|(c, &x)| c.eval(x)).collect();
    let n0 = lq_norm(phi.iter().copied(), q0);
    let n1 = lq_norm(z.iter().copied(), q1);
    let gradient = |xs: &[f64], n: f64, q: f64| -> Option<Vec<f64>> {
        if q == 1.0 {
            Some(vec![1.0; xs.len()])
        } else if n > 0.0 {
            Some(xs.iter().map(|&x| (x / n).powf(q - 1.0)).collect())
        } else {
            None
        }
    };
    let normalize = |mut v: Vec<f64>, q: f64| {
        let n = lq_norm(v.iter().copied(), conjugate(q));
        if n > 1.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        v
    };
    // slope of the segment each coordinate sits on; stationarity there reads nu_u = mu_u sigma
    let sigma: Vec<f64> = curves
        .iter()
        .zip(z)
        .map(|(c, &x)| {
            let k = c.z.partition_point(|&zk| zk <= x).clamp(1, c.z.len() - 1) - 1;
            c.slope(k)
        })
        .collect();
    let bound = |mu: Vec<f64>, nu: Vec<f64>| -> f64 {
        let (mu, nu) = (normalize(mu, q0), normalize(nu, q1));
        curves
            .iter()
            .zip(mu.iter().zip(&nu))
            .map(|(c, (&m, &v))| c.z.iter().zip(&c.phi).map(|(&zk, &pk)| m * pk + v * zk).fold(f64::INFINITY, f64::min))
            .sum()
    };
    // the gradient on a side whose entries are nearly exhausted is unreliable, so the
    // other side's gradient is also transported through the stationarity condition
    let (g0, g1) = (gradient(&phi, n0, q0), gradient(z, n1, q1));
    let mut best = 0.0f64;
    if let (Some(mu), Some(nu)) = (&g0, &g1) {
        best = best.max(bound(mu.clone(), nu.clone()));
    }
    if let Some(nu) = &g1 {
        best = best.max(bound(nu.iter().zip(&sigma).map(|(v, s)| v / s).collect(), nu.clone()));
    }
    if let Some(mu) = &g0 {
        best = best.max(bound(mu.clone(), mu.iter().zip(&sigma).map(|(m, s)| m * s).collect()));
    }
    best
}

fn scalar_tradeoffs(t: f64, y: &WeightedSeq, couple: &CoupleSpec) -> Vec<Tradeoff> {
    y.iter()
        .map(|(u, v)| Tradeoff::linear((u as f64 * couple.a0).exp2() * v, t * (u as f64 * couple.a1).exp2() * v))
        .collect()
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("t must be positive and finite, got {t}")))
    }
}

/// K-functional of a sequence over coordinatewise scalar splits.
pub fn k_functional(t: f64, y: &WeightedSeq, couple: &CoupleSpec) -> Result<f64> {
    check_t(t)?;
    couple.require_convex()?;
    solve(&scalar_tradeoffs(t, y, couple), couple.q0, couple.q1)
}

/// `K(t, f; L^1, L^inf) = int_0^t f*`.
pub fn k_functional_l1_linf(f: &RadialStepFunction, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(f.rearrangement().integral_to(t))
}

fn annular_tradeoff(t: f64, u: i32, g: &StepRearrangement, couple: &CoupleSpec) -> Tradeoff {
    let w0 = (u as f64 * couple.a0).exp2();
    let w1 = t * (u as f64 * couple.a1).exp2();
    // truncation heights 0 < w_k < ... < w_1
    let mut heights = vec![0.0];
    heights.extend(g.levels().iter().rev());
    let z = heights.iter().map(|&c| w1 * c).collect();
    let phi = heights.iter().map(|&c| w0 * g.excess_above(c)).collect();
    Tradeoff { z, phi }
}

/// K-functional of `f` for `(l_{q0}^{a0}(L^1), l_{q1}^{a1}(L^inf))` over annulus restrictions.
pub fn k_functional_annular(t: f64, f: &RadialStepFunction, couple: &CoupleSpec) -> Result<f64> {
    AnnularCurve::new(f, *couple)?.k(t)
}

/// A K-functional as a function of `t`, with its two limits.
pub trait KCurve: Sync {
    fn k(&self, t: f64) -> Result<f64>;
    /// `lim_{t -> inf} K(t) = ||y||_0`.
    fn n0(&self) -> f64;
    /// `lim_{t -> 0} K(t)/t = ||y||_1`.
    fn n1(&self) -> f64;
    /// Values of `t` near which `K` changes regime.
    fn kinks(&self) -> Vec<f64>;
}

fn regime_changes(indices: impl Iterator<Item = i32>, couple: &CoupleSpec) -> Vec<f64> {
    indices.map(|u| (u as f64 * (couple.a0 - couple.a1)).exp2()).collect()
}

/// Scalar-split K of a weighted sequence.
#[derive(Debug, Clone)]
pub struct SeqCurve {
    pub y: WeightedSeq,
    pub couple: CoupleSpec,
}

impl SeqCurve {
    pub fn new(y: WeightedSeq, couple: CoupleSpec) -> Result<Self> {
        couple.require_convex()?;
        Ok(Self { y, couple })
    }
}

impl KCurve for SeqCurve {
    fn k(&self, t: f64) -> Result<f64> {
        k_functional(t, &self.y, &self.couple)
    }
    fn n0(&self) -> f64 {
        self.y.ell_norm(self.couple.a0, self.couple.q0)
    }
    fn n1(&self) -> f64 {
        self.y.ell_norm(self.couple.a1, self.couple.q1)
    }
    fn kinks(&self) -> Vec<f64> {
        regime_changes(self.y.iter().map(|(u, _)| u), &self.couple)
    }
}

/// `K(t, f; L^1, L^inf)` as a curve.
#[derive(Debug, Clone)]
pub struct L1LinfCurve {
    pub g: StepRearrangement,
}

impl L1LinfCurve {
    pub fn new(f: &RadialStepFunction) -> Self {
        Self { g: f.rearrangement() }
    }
}

impl KCurve for L1LinfCurve {
    fn k(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.g.integral_to(t))
    }
    fn n0(&self) -> f64 {
        self.g.total_mass()
    }
    fn n1(&self) -> f64 {
        self.g.sup()
    }
    fn kinks(&self) -> Vec<f64> {
        self.g.knots()[1..].to_vec()
    }
}

/// Annular `(l_{q0}^{a0}(L^1), l_{q1}^{a1}(L^inf))` K of a function.
#[derive(Debug, Clone)]
pub struct AnnularCurve {
    profiles: Vec<(i32, StepRearrangement)>,
    couple: CoupleSpec,
}

impl AnnularCurve {
    pub fn new(f: &RadialStepFunction, couple: CoupleSpec) -> Result<Self> {
        couple.require_convex()?;
        Ok(Self { profiles: annulus_profiles(f), couple })
    }
}

impl KCurve for AnnularCurve {
    fn k(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        let curves: Vec<Tradeoff> =
            self.profiles.iter().map(|(u, g)| annular_tradeoff(t, *u, g, &self.couple)).collect();
        solve(&curves, self.couple.q0, self.couple.q1)
    }
    fn n0(&self) -> f64 {
        let ys = self.profiles.iter().map(|(u, g)| (*u, g.total_mass()));
        crate::interp::seq::weighted_norm(ys, self.couple.a0, self.couple.q0)
    }
    fn n1(&self) -> f64 {
        let ys = self.profiles.iter().map(|(u, g)| (*u, g.sup()));
        crate::interp::seq::weighted_norm(ys, self.couple.a1, self.couple.q1)
    }
    fn kinks(&self) -> Vec<f64> {
        let mut out = regime_changes(self.profiles.iter().map(|(u, _)| *u), &self.couple);
        // within an annulus the truncation level moves through the profile's knots
        for (u, g) in &self.profiles {
            let base = (*u as f64 * (self.couple.a0 - self.couple.a1)).exp2();
            out.extend(g.knots()[1..].iter().map(|k| base * k));
        }
        out
    }
}

/// Sampled `(t, K(t))` pairs.
pub fn k_curve(curve: &dyn KCurve, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    ts.iter().map(|&t| Ok((t, curve.k(t)?))).collect()
}

/// Outcome of the structural checks on a sampled K-curve.
#[derive(Debug, Clone, Serialize)]
pub struct KInvariants {
    pub nondecreasing: bool,
    pub concave: bool,
    pub below_min: bool,
    pub k_over_t_nonincreasing: bool,
}

impl KInvariants {
    pub fn all(&self) -> bool {
        self.nondecreasing && self.concave && self.below_min && self.k_over_t_nonincreasing
    }
}

/// Checks monotonicity, concavity, `K <= min(n0, t n1)` and `K/t` nonincreasing
/// on increasing samples, with relative slack `tol`.
pub fn check_k_invariants(points: &[(f64, f64)], n0: f64, n1: f64, tol: f64) -> KInvariants {
    let scale = points.iter().map(|p| p.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let slack = tol * scale;
    let nondecreasing = points.windows(2).all(|w| w[1].1 >= w[0].1 - slack);
    let concave = points.windows(3).all(|w| {
        let ((t0, k0), (t1, k1), (t2, k2)) = (w[0], w[1], w[2]);
        let chord = k0 + (k2 - k0) * (t1 - t0) / (t2 - t0);
        k1 >= chord - slack
    });
    let below_min = points.iter().all(|&(t, k)| k <= n0.min(t * n1) * (1.0 + tol) + f64::MIN_POSITIVE);
    let k_over_t_nonincreasing = points.windows(2).all(|w| w[1].1 / w[1].0 <= w[0].1 / w[0].0 * (1.0 + tol));
    KInvariants { nondecreasing, concave, below_min, k_over_t_nonincreasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn y3() -> WeightedSeq {
        WeightedSeq::new([(-1, 1.0), (0, 1.0), (1, 1.0)]).unwrap()
    }

    #[test]
    fn l1_couple_closed_form() {
        let couple = CoupleSpec::sequence(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(k_functional(1.0, &y3(), &couple).unwrap(), 2.5, max_relative = 1e-15);
    }

    #[test]
    fn endpoint_limits() {
        let y = WeightedSeq::new([(-1, 0.3), (2, 1.5), (4, 0.2)]).unwrap();
        for &(q0, q1) in &[(1.0, 2.0), (2.0, 3.0), (f64::INFINITY, 2.0), (1.5, f64::INFINITY)] {
            let couple = CoupleSpec::sequence(0.5, q0, -0.5, q1).unwrap();
            let curve = SeqCurve::new(y.clone(), couple).unwrap();
            let small = 1e-9;
            assert_relative_eq!(curve.k(small).unwrap() / small, curve.n1(), max_relative = 1e-8);
            assert_relative_eq!(curve.k(1e9).unwrap(), curve.n0(), max_relative = 1e-8);
        }
    }

    #[test]
    fn sup_couple_exceeds_sup_min() {
        // for q0 = q1 = inf the scalar-split K is not the coordinatewise sup of minima:
        // here alpha = (1, 2), beta = (2, 1), sup-min is 1 and K is 4/3 at rho = 2/3
        let couple = CoupleSpec::sequence(1.0, f64::INFINITY, -1.0, f64::INFINITY).unwrap();
        let y = WeightedSeq::new([(0, 1.0), (1, 1.0)]).unwrap();
        let k = k_functional(2.0, &y, &couple).unwrap();
        assert_relative_eq!(k, 4.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn l1_linf_examples() {
        let chi = RadialStepFunction::indicator_ball(1, 1.0).unwrap();
        for &t in &[0.25, 1.0, 3.0] {
            assert_eq!(k_functional_l1_linf(&chi, t).unwrap(), t.min(1.0));
        }
        let f = RadialStepFunction::from_shells(1, &[(0.5, 3.0), (2.0, 1.0)]).unwrap();
        assert_eq!(k_functional_l1_linf(&f, 1.0).unwrap(), 2.0);
        assert!(k_functional_l1_linf(&f, 0.0).is_err());
    }

    #[test]
    fn truncation_oracle() {
        // K(t; L1, Linf) = min over truncation heights c of int (|f| - c)_+ + t c
        let f = RadialStepFunction::from_shells(2, &[(0.3, 5.0), (1.2, -2.0), (0.7, 0.5)]).unwrap();
        let g = f.rearrangement();
        for &t in &[0.1, 0.3, 1.0, 1.7, 2.2, 10.0] {
            let mut best = f64::INFINITY;
            for c in std::iter::once(0.0).chain(g.levels().iter().copied()) {
                best = best.min(g.excess_above(c) + t * c);
            }
            assert_relative_eq!(k_functional_l1_linf(&f, t).unwrap(), best, max_relative = 1e-12);
        }
    }

    #[test]
    fn annular_single_annulus_matches_l1_linf() {
        // one annulus, zero weights: the annular couple is the plain (L1, Linf) couple
        let f = RadialStepFunction::new(1, vec![0.0, 0.55, 0.7, 0.8, 0.95], vec![0.0, 2.0, 5.0, 1.0]).unwrap();
        let couple = CoupleSpec::new(0.0, 1.0, 0.0, 1.0, Base::L1Linf).unwrap();
        for &t in &[0.05, 0.2, 0.5, 2.0] {
            let a = k_functional_annular(t, &f, &couple).unwrap();
            assert_relative_eq!(a, k_functional_l1_linf(&f, t).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_nonconvex_exponents() {
        let couple = CoupleSpec::sequence(0.0, 0.5, 1.0, 1.0).unwrap();
        assert!(k_functional(1.0, &y3(), &couple).is_err());
    }

    #[test]
    fn homogeneous_under_doubling() {
        let y = WeightedSeq::new([(-1, 0.7), (0, 0.2), (3, 1.1)]).unwrap();
        let couple = CoupleSpec::sequence(0.0, 1.5, 1.0, 2.5).unwrap();
        for &t in &[0.01, 0.3, 2.0] {
            let k1 = k_functional(t, &y, &couple).unwrap();
            let k2 = k_functional(t, &y.scale(2.0), &couple).unwrap();
            assert_eq!(k2, 2.0 * k1);
        }
    }

    #[test]
    fn certifies_across_scales() {
        let y = WeightedSeq::new([(-1, 0.3), (2, 1.0), (5, 2.0), (8, 0.5)]).unwrap();
        for &(q0, q1) in &[(2.0, 2.0), (1.0, 3.0), (3.0, 1.0), (1.5, 4.0), (2.0, f64::INFINITY)] {
            let couple = CoupleSpec::sequence(0.0, q0, 1.0, q1).unwrap();
            for i in -160..=160 {
                let t = (i as f64 / 8.0).exp2();
                assert!(k_functional(t, &y, &couple).is_ok(), "q0={q0} q1={q1} t={t}");
            }
        }
    }

    #[test]
    fn optimum_just_past_a_kink() {
        // the path stalls on two kinks over a wide range of lambda and the true
        // optimum sits slightly beyond one of them
        let f = RadialStepFunction::new(1, vec![0.0, 2.46875, 4.765625, 6.5625, 7.046875], vec![-2.25, 1.75, -2.75, 1.75]).unwrap();
        let couple = CoupleSpec::new(0.0, 1.0, 1.0, 2.0, Base::L1Linf).unwrap();
        let curve = AnnularCurve::new(&f, couple).unwrap();
        for i in -400..=400 {
            let t = (i as f64 / 8.0).exp2();
            assert!(curve.k(t).is_ok(), "t={t}");
        }
    }

    #[test]
    fn nearly_exhausted_coordinate_is_certified() {
        // at small t one coordinate sits within rounding of its end, where its
        // side-0 gradient vanishes and the dual must come from stationarity
        let ys = [2.373508294534516, 0.1, 3.4411558952728765, 3.001605320997334];
        let y = WeightedSeq::new(ys.iter().enumerate().map(|(i, &v)| (2 * i as i32, v))).unwrap();
        let couple = CoupleSpec::sequence(-0.7786272826287247, 1.5, 0.8159104599616712, 3.0).unwrap();
        let curve = SeqCurve::new(y, couple).unwrap();
        let ts: Vec<f64> = (0..40).map(|i| (-10.0 + i as f64 / 2.0).exp2()).collect();
        let pts = k_curve(&curve, &ts).unwrap();
        assert!(check_k_invariants(&pts, curve.n0(), curve.n1(), 1e-9).all());
    }
}
