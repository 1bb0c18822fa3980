//! Step functions on a uniform grid of `[-R, R]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{annulus_index, annulus_radii};
use crate::herz::{profile_scores, HerzParams};
use crate::interp::seq::WeightedSeq;
use crate::lorentz::LorentzParams;
use crate::rearrange::StepRearrangement;

/// `values[i]` is the value on `[-R + i h, -R + (i+1) h)`, `h = 2R / cells`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridFunction1D {
    half_width: f64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    half_width: f64,
    cells: usize,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction1D {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        if raw.cells != raw.values.len() {
            return Err(Error::InvalidFunction(format!("cells = {} but {} values", raw.cells, raw.values.len())));
        }
        GridFunction1D::new(raw.half_width, raw.values)
    }
}

impl From<GridFunction1D> for RawGrid {
    fn from(f: GridFunction1D) -> Self {
        RawGrid { half_width: f.half_width, cells: f.values.len(), values: f.values }
    }
}

impl GridFunction1D {
    pub fn new(half_width: f64, values: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidFunction(format!("half width must be positive, got {half_width}")));
        }
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::InvalidFunction(format!("need an even, positive number of cells, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite cell value {v}")));
        }
        Ok(Self { half_width, values })
    }

    pub fn zero(half_width: f64, cells: usize) -> Result<Self> {
        Self::new(half_width, vec![0.0; cells])
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(half_width: f64, cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * half_width / cells as f64;
        Self::new(half_width, (0..cells).map(|i| f(-half_width + (i as f64 + 0.5) * h)).collect())
    }

    /// `chi_[lo, hi)` on the grid; `lo`, `hi` should be cell edges.
    pub fn indicator(half_width: f64, cells: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::from_fn(half_width, cells, |x| if x >= lo && x < hi { 1.0 } else { 0.0 })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells() as f64
    }

    /// Left edge of cell `i`; `edge(cells())` is `R`.
    pub fn edge(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    pub fn center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    /// Cell containing `x`, if inside the grid.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let i = ((x + self.half_width) / self.h()).floor();
        (i >= 0.0 && (i as usize) < self.cells()).then_some(i as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Same function on cells of half the width.
    pub fn refine(&self) -> Self {
        Self { half_width: self.half_width, values: self.values.iter().flat_map(|&v| [v, v]).collect() }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self { half_width: self.half_width, values: self.values.iter().map(|v| alpha * v).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { half_width: self.half_width, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.half_width != other.half_width || self.cells() != other.cells() {
            return Err(Error::InvalidFunction("grid functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { half_width: self.half_width, values })
    }

    /// `x -> f(-x)`.
    pub fn mirror(&self) -> Self {
        Self { half_width: self.half_width, values: self.values.iter().rev().copied().collect() }
    }

    /// `(sum_i h |v_i|^p)^{1/p}`, sup at `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let h = self.h();
        self.values.iter().map(|v| h * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.lp_norm(1.0)
    }

    /// `(measure, value)` pieces of `f chi_{A_u}`, cells split at `0` and at
    /// every dyadic radius they straddle.
    pub fn annulus_pieces(&self) -> BTreeMap<i32, Vec<(f64, f64)>> {
        let mut out: BTreeMap<i32, Vec<(f64, f64)>> = BTreeMap::new();
        let mut push = |r0: f64, r1: f64, v: f64| {
            let mut u = annulus_index(r0);
            loop {
                let (inner, outer) = annulus_radii(u);
                if inner >= r1 {
                    break;
                }
                let (a, b) = (r0.max(inner), r1.min(outer));
                if b > a {
                    out.entry(u).or_default().push((b - a, v));
                }
                u += 1;
            }
        };
        for (i, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (x0, x1) = (self.edge(i), self.edge(i + 1));
            if x0 >= 0.0 {
                push(x0, x1, v);
            } else if x1 <= 0.0 {
                push(-x1, -x0, v);
            } else {
                push(0.0, -x0, v);
                push(0.0, x1, v);
            }
        }
        out
    }

    pub fn annulus_profiles(&self) -> Vec<(i32, StepRearrangement)> {
        self.annulus_pieces().into_iter().map(|(u, pieces)| (u, StepRearrangement::from_pieces(pieces))).collect()
    }

    pub fn rearrangement(&self) -> StepRearrangement {
        let h = self.h();
        StepRearrangement::from_pieces(self.values.iter().map(|&v| (h, v)))
    }

    pub fn hl_norm(&self, params: HerzParams, starred: bool) -> Result<f64> {
        Ok(profile_scores(&self.annulus_profiles(), params.lorentz(), starred)?.ell_norm(params.a, params.q))
    }
}

/// Per-annulus profiles computed once, for norms at many parameter cells.
#[derive(Debug, Clone)]
pub struct AnnularProfiles(pub Vec<(i32, StepRearrangement)>);

impl AnnularProfiles {
    pub fn of(f: &GridFunction1D) -> Self {
        Self(f.annulus_profiles())
    }

    pub fn scores(&self, base: LorentzParams) -> Result<WeightedSeq> {
        profile_scores(&self.0, base, false)
    }

    pub fn hl_norm(&self, params: HerzParams) -> Result<f64> {
        Ok(self.scores(params.lorentz())?.ell_norm(params.a, params.q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::annulus_measure;

    #[test]
    fn validates() {
        assert!(GridFunction1D::new(1.0, vec![1.0; 3]).is_err());
        assert!(GridFunction1D::new(0.0, vec![1.0; 2]).is_err());
        assert!(GridFunction1D::new(1.0, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn pieces_cover_the_annuli() {
        // a constant function on [-4, 4) fills A_{-1}, A_0, A_1, A_2 exactly
        let f = GridFunction1D::new(4.0, vec![1.0; 24]).unwrap();
        let pieces = f.annulus_pieces();
        assert_eq!(pieces.keys().copied().collect::<Vec<_>>(), vec![-1, 0, 1, 2]);
        for (u, ps) in &pieces {
            let m: f64 = ps.iter().map(|p| p.0).sum();
            assert!((m - annulus_measure(1, *u)).abs() < 1e-14, "u={u} m={m}");
        }
    }

    #[test]
    fn lebesgue_identity() {
        let f = GridFunction1D::from_fn(8.0, 64, |x| (x * 1.3).sin() + 0.2).unwrap();
        for &p in &[1.5, 2.0, 4.0] {
            let hl = f.hl_norm(HerzParams::new(0.0, p, p, p).unwrap(), false).unwrap();
            assert!((hl - f.lp_norm(p)).abs() <= 1e-12 * hl, "p={p}");
        }
    }

    #[test]
    fn refine_keeps_norms() {
        let f = GridFunction1D::from_fn(2.0, 16, |x| x.abs().floor() + 1.0).unwrap();
        let params = HerzParams::new(0.3, 2.0, 1.0, 4.0).unwrap();
        let (a, b) = (f.hl_norm(params, false).unwrap(), f.refine().hl_norm(params, false).unwrap());
        assert!((a - b).abs() <= 1e-13 * a);
    }
}
