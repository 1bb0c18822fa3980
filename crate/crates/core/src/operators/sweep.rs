//! Empirical operator norms `||Tf||_{HL} / ||f||_{HL}` over parameter grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herz::HerzParams;
use crate::interp::seq::WeightedSeq;
use crate::lorentz::{conjugate, LorentzParams};
use crate::operators::grid::{AnnularProfiles, GridFunction1D};
use crate::operators::size::DRIFT_TOL;
use crate::operators::Operator;

/// Relative agreement required between the interpolated check and the sweep.
pub const CROSS_TOL: f64 = 1e-6;

/// `-N/p < a < N/p'` with `N = 1`.
pub fn in_window(a: f64, p: f64) -> bool {
    p > 1.0 && p.is_finite() && -1.0 / p < a && a < 1.0 / conjugate(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// `a` is `fraction * N / max(p, p')`, strictly inside the window.
    pub a_fractions: Vec<f64>,
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub rs: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            a_fractions: vec![-0.4, -0.2, 0.0, 0.2, 0.4],
            ps: vec![1.5, 2.0, 4.0],
            qs: vec![1.0, 2.0, f64::INFINITY],
            rs: vec![1.0, 2.0, f64::INFINITY],
        }
    }
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<HerzParams> {
        let mut out = Vec::new();
        for &p in &self.ps {
            for &frac in &self.a_fractions {
                let a = frac / p.max(conjugate(p));
                for &q in &self.qs {
                    for &r in &self.rs {
                        out.push(HerzParams { a, p, q, r });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Pass,
    /// Ratios at the two refinement levels drift apart by more than 5%.
    Unreliable,
    /// Outside the hypotheses; listed, not run.
    Excluded,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub params: HerzParams,
    pub status: CellStatus,
    pub ratio: f64,
    pub refined_ratio: f64,
    pub drift: f64,
    /// Corpus member attaining `ratio`.
    pub argmax: Option<usize>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport {
    pub operator: Operator,
    pub cells_base: Vec<usize>,
    pub cells: Vec<CellResult>,
    /// Largest ratio over the passing cells.
    pub constant: f64,
    pub pass: bool,
}

fn exclusion(op: Operator, c: &HerzParams) -> Option<String> {
    if !(c.p > 1.0 && c.p.is_finite()) {
        return Some(format!("p = {} outside 1 < p < inf", c.p));
    }
    if c.q < 1.0 || c.r < 1.0 {
        return Some(format!("q = {}, r = {}: needs q, r >= 1", c.q, c.r));
    }
    if !in_window(c.a, c.p) {
        return Some(format!("a = {} outside (-1/p, 1/p') = ({}, {})", c.a, -1.0 / c.p, 1.0 / conjugate(c.p)));
    }
    if !op.lorentz_bounded(c.r) {
        return Some(format!("{op} is not bounded on L^{{p,inf}}"));
    }
    None
}

/// Profiles of `f`, `Tf` and `T(refined f)` for one corpus member.
struct MemberProfiles {
    grid: GridFunction1D,
    transformed: GridFunction1D,
    f: AnnularProfiles,
    tf: AnnularProfiles,
    tf_refined: AnnularProfiles,
}

fn member_profiles(op: Operator, f: &GridFunction1D) -> MemberProfiles {
    let tf = op.apply(f);
    MemberProfiles {
        f: AnnularProfiles::of(f),
        tf: AnnularProfiles::of(&tf),
        tf_refined: AnnularProfiles::of(&op.apply(&f.refine())),
        grid: f.clone(),
        transformed: tf,
    }
}

/// Per member, per `(a, q)`: ratios at levels 0 and 1, `None` when the member has zero norm.
type RatioTable = Vec<Vec<Option<(f64, f64)>>>;

/// Ratios `(level 0, level 1)` for every member at one `(p, r)` and a list of `(a, q)`.
fn ratios_at(members: &[MemberProfiles], base: LorentzParams, aq: &[(f64, f64)]) -> Result<RatioTable> {
    members
        .iter()
        .map(|m| -> Result<Vec<Option<(f64, f64)>>> {
            let (sf, s0, s1): (WeightedSeq, WeightedSeq, WeightedSeq) =
                (m.f.scores(base)?, m.tf.scores(base)?, m.tf_refined.scores(base)?);
            Ok(aq
                .iter()
                .map(|&(a, q)| {
                    let nf = sf.ell_norm(a, q);
                    (nf > 0.0).then(|| (s0.ell_norm(a, q) / nf, s1.ell_norm(a, q) / nf))
                })
                .collect())
        })
        .collect()
}

/// `T` applied to a corpus at two refinement levels, reusable across many parameter cells.
pub struct AppliedCorpus {
    op: Operator,
    cells_base: Vec<usize>,
    members: Vec<MemberProfiles>,
}

impl AppliedCorpus {
    pub fn new(op: Operator, corpus: &[GridFunction1D]) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::InvalidParams("empty corpus".into()));
        }
        Ok(Self {
            op,
            cells_base: corpus.iter().map(|f| f.cells()).collect(),
            members: corpus.par_iter().map(|f| member_profiles(op, f)).collect(),
        })
    }

    pub fn operator(&self) -> Operator {
        self.op
    }

    /// `max ||Tf||_p / ||f||_p` over the corpus at the base level, straight from the grid values.
    pub fn lebesgue_ratio(&self, p: f64) -> f64 {
        self.members
            .iter()
            .filter(|m| !m.grid.is_zero())
            .map(|m| m.transformed.lp_norm(p) / m.grid.lp_norm(p))
            .fold(0.0, f64::max)
    }
}

pub fn boundedness_sweep(op: Operator, corpus: &[GridFunction1D], cells: &[HerzParams]) -> Result<BoundednessReport> {
    sweep_applied(&AppliedCorpus::new(op, corpus)?, cells)
}

/// The sweep over an already transformed corpus.
pub fn sweep_applied(applied: &AppliedCorpus, cells: &[HerzParams]) -> Result<BoundednessReport> {
    let (op, members) = (applied.op, &applied.members);
    let mut results: Vec<Option<CellResult>> = vec![None; cells.len()];
    // group runnable cells by Lorentz base so each annulus norm is computed once
    let mut bases: Vec<(LorentzParams, Vec<usize>)> = Vec::new();
    for (k, c) in cells.iter().enumerate() {
        if let Some(reason) = exclusion(op, c) {
            results[k] = Some(CellResult {
                params: *c,
                status: CellStatus::Excluded,
                ratio: f64::NAN,
                refined_ratio: f64::NAN,
                drift: f64::NAN,
                argmax: None,
                reason: Some(reason),
            });
            continue;
        }
        let base = c.lorentz();
        match bases.iter_mut().find(|(b, _)| *b == base) {
            Some((_, ks)) => ks.push(k),
            None => bases.push((base, vec![k])),
        }
    }
    let computed: Vec<Vec<(usize, CellResult)>> = bases
        .par_iter()
        .map(|(base, ks)| -> Result<Vec<(usize, CellResult)>> {
            let aq: Vec<(f64, f64)> = ks.iter().map(|&k| (cells[k].a, cells[k].q)).collect();
            let per_member = ratios_at(members, *base, &aq)?;
            Ok(ks
                .iter()
                .enumerate()
                .map(|(j, &k)| {
                    let (mut ratio, mut refined, mut argmax) = (0.0f64, 0.0f64, None);
                    for (i, row) in per_member.iter().enumerate() {
                        if let Some((r0, r1)) = row[j] {
                            if argmax.is_none() || r0 > ratio {
                                ratio = r0;
                                argmax = Some(i);
                            }
                            refined = refined.max(r1);
                        }
                    }
                    let drift = if ratio > 0.0 { (refined - ratio).abs() / ratio } else { 0.0 };
                    let ok = ratio.is_finite() && refined.is_finite() && drift <= DRIFT_TOL;
                    let status = if ok { CellStatus::Pass } else { CellStatus::Unreliable };
                    let reason = (!ok).then(|| format!("refinement drift {drift:.3e} exceeds {DRIFT_TOL}"));
                    (k, CellResult { params: cells[k], status, ratio, refined_ratio: refined, drift, argmax, reason })
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    for (k, r) in computed.into_iter().flatten() {
        results[k] = Some(r);
    }
    let cells: Vec<CellResult> = results.into_iter().map(|r| r.expect("every cell is excluded or computed")).collect();
    let constant = cells.iter().filter(|c| c.status == CellStatus::Pass).map(|c| c.ratio).fold(0.0, f64::max);
    let pass = cells.iter().all(|c| c.status != CellStatus::Unreliable);
    Ok(BoundednessReport { operator: op, cells_base: applied.cells_base.clone(), cells, constant, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessPoint {
    pub v: i32,
    /// The grid covers `|x| < 2^window`.
    pub window: i32,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub operator: Operator,
    pub params: HerzParams,
    pub points: Vec<WitnessPoint>,
    /// `None` when the family has a single member.
    pub growing: Option<bool>,
    /// Last ratio increment over the one before it; below 1 the ratios are
    /// saturating, at or above 1 they keep climbing. Needs three members.
    pub tail_increment_ratio: Option<f64>,
}

/// Ratios for `f = chi_{A_v}`, `v = 1..=v_max`, each on a grid reaching `|x| < 2^{2v+2}`
/// with cells of width `1/2` (every dyadic radius is a cell edge).
pub fn witness_family(op: Operator, params: HerzParams, v_max: i32) -> Result<WitnessReport> {
    if v_max < 1 {
        return Err(Error::InvalidParams("family size must be >= 1".into()));
    }
    let points: Vec<WitnessPoint> = (1..=v_max)
        .map(|v| -> Result<WitnessPoint> {
            let window = 2 * v + 2;
            let half_width = window_radius(window);
            let cells = (4.0 * half_width) as usize;
            let (inner, outer) = crate::geometry::annulus_radii(v);
            let f = GridFunction1D::from_fn(half_width, cells, |x| {
                if x.abs() >= inner && x.abs() < outer { 1.0 } else { 0.0 }
            })?;
            let tf = op.apply(&f);
            let ratio = tf.hl_norm(params, false)? / f.hl_norm(params, false)?;
            Ok(WitnessPoint { v, window, ratio })
        })
        .collect::<Result<_>>()?;
    let growing = (points.len() > 1).then(|| points.windows(2).all(|w| w[1].ratio > w[0].ratio));
    let tail_increment_ratio = match points.as_slice() {
        [.., x, y, z] => Some((z.ratio - y.ratio) / (y.ratio - x.ratio)),
        _ => None,
    };
    Ok(WitnessReport { operator: op, params, points, growing, tail_increment_ratio })
}

fn window_radius(window: i32) -> f64 {
    (window as f64).exp2()
}

/// The witness family for `a >= N/p'`, outside the range where the operator is bounded.
pub fn out_of_range_witness(op: Operator, params: HerzParams, v_max: i32) -> Result<WitnessReport> {
    if op != Operator::Maximal {
        return Err(Error::InvalidParams("the witness family is defined for the maximal operator".into()));
    }
    if !(params.p > 1.0 && params.p.is_finite()) || params.a < 1.0 / conjugate(params.p) {
        return Err(Error::Hypothesis(format!(
            "witness needs 1 < p < inf and a >= 1/p' = {}, got a = {}",
            1.0 / conjugate(params.p),
            params.a
        )));
    }
    witness_family(op, params, v_max)
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolatedReport {
    pub params: HerzParams,
    pub ratio: f64,
    pub refined_ratio: f64,
    pub drift: f64,
    /// Same cell through the sweep, when `q >= 1` puts it in the sweep's range.
    pub sweep_ratio: Option<f64>,
    pub agreement: Option<f64>,
    pub pass: bool,
}

/// `T` on `HL_{p,q}^{a,q}` for linear `T`, any `0 < q < inf`.
pub fn interpolated_boundedness_check(
    op: Operator,
    p: f64,
    q: f64,
    a: f64,
    corpus: &[GridFunction1D],
) -> Result<InterpolatedReport> {
    interpolated_hypotheses(op, p, q, a)?;
    interpolated_applied(&AppliedCorpus::new(op, corpus)?, p, q, a)
}

fn interpolated_hypotheses(op: Operator, p: f64, q: f64, a: f64) -> Result<()> {
    if !op.is_linear() {
        return Err(Error::Hypothesis(format!("{op} is only sublinear; the interpolated bound needs a linear operator")));
    }
    if !(p > 1.0 && p.is_finite()) || !(q > 0.0 && q.is_finite()) {
        return Err(Error::Hypothesis(format!("needs 1 < p < inf and 0 < q < inf, got p={p}, q={q}")));
    }
    if !in_window(a, p) {
        return Err(Error::Hypothesis(format!("a = {a} outside (-1/p, 1/p')")));
    }
    Ok(())
}

/// The interpolated check over an already transformed corpus.
pub fn interpolated_applied(applied: &AppliedCorpus, p: f64, q: f64, a: f64) -> Result<InterpolatedReport> {
    interpolated_hypotheses(applied.op, p, q, a)?;
    let params = HerzParams::new(a, p, q, q)?;
    let rows = ratios_at(&applied.members, params.lorentz(), &[(a, q)])?;
    let (mut ratio, mut refined) = (0.0f64, 0.0f64);
    for (r0, r1) in rows.iter().filter_map(|r| r[0]) {
        ratio = ratio.max(r0);
        refined = refined.max(r1);
    }
    let drift = if ratio > 0.0 { (refined - ratio).abs() / ratio } else { 0.0 };
    let (sweep_ratio, agreement) = if q >= 1.0 {
        let sweep = sweep_applied(applied, &[params])?;
        let s = sweep.cells[0].ratio;
        (Some(s), Some(if s > 0.0 { (ratio - s).abs() / s } else { 0.0 }))
    } else {
        (None, None)
    };
    let pass = ratio.is_finite() && drift <= DRIFT_TOL && agreement.is_none_or(|x| x <= CROSS_TOL);
    Ok(InterpolatedReport { params, ratio, refined_ratio: refined, drift, sweep_ratio, agreement, pass })
}
