//! The retraction `L f = (f chi_{A_u})_u` onto annulus sequences and the
//! coretraction `M` that reassembles a function from per-annulus witnesses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::annulus_radii;
use crate::herz::{annuli_decompose, annulus_scores};
use crate::interp::seq::WeightedSeq;
use crate::lorentz::LorentzParams;
use crate::rearrange::RadialStepFunction;

/// `L f`: the annulus restrictions and their base-space norms.
#[derive(Debug, Clone, Serialize)]
pub struct Retract {
    pub scores: WeightedSeq,
    pub pieces: Vec<(i32, RadialStepFunction)>,
}

pub fn retract_l(f: &RadialStepFunction, base: LorentzParams) -> Result<Retract> {
    Ok(Retract { scores: annulus_scores(f, base, false)?, pieces: annuli_decompose(f) })
}

/// `M`: rescales each witness `w_j` (supported in `A_j` of `R^dim`) to carry score `y_j` and sums.
pub fn coretract_m(
    y: &WeightedSeq,
    witnesses: &[(i32, RadialStepFunction)],
    dim: u32,
    base: LorentzParams,
) -> Result<RadialStepFunction> {
    if let Some((u, _)) = witnesses.iter().find(|(_, w)| w.dim() != dim) {
        return Err(Error::InvalidFunction(format!("witness for annulus {u} lives in another dimension")));
    }
    let mut out = RadialStepFunction::zero(dim);
    for (u, yu) in y.iter() {
        let Some((_, w)) = witnesses.iter().find(|(j, _)| *j == u) else {
            return Err(Error::InvalidFunction(format!("no witness for annulus {u}")));
        };
        let (inner, outer) = annulus_radii(u);
        if w.shells().any(|(a, b, v)| v != 0.0 && (a < inner || b > outer)) {
            return Err(Error::InvalidFunction(format!("witness for annulus {u} leaves A_{u}")));
        }
        let norm = annulus_scores(w, base, false)?.get(u);
        if norm == 0.0 {
            return Err(Error::InvalidFunction(format!("witness for annulus {u} vanishes")));
        }
        let c = yu / norm;
        out = out.add(&if c == 1.0 { w.clone() } else { w.scale(c) })?;
    }
    Ok(out.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herz::{hl_norm, HerzParams};
    use approx::assert_relative_eq;

    #[test]
    fn single_annulus() {
        let base = LorentzParams::new(3.0, 1.5).unwrap();
        let f = RadialStepFunction::indicator_shell(1, 0.5, 1.0).unwrap();
        let l = retract_l(&f, base).unwrap();
        assert_eq!(l.scores.len(), 1);
        assert_relative_eq!(l.scores.get(0), 2f64.powf(1.0 / 1.5), max_relative = 1e-15);
        let params = HerzParams::new(0.7, 3.0, 2.0, 1.5).unwrap();
        assert_eq!(l.scores.ell_norm(0.7, 2.0), hl_norm(&f, params, false).unwrap());
    }

    #[test]
    fn m_after_l_is_identity() {
        let base = LorentzParams::new(2.0, 4.0).unwrap();
        let f = RadialStepFunction::new(2, vec![0.0, 0.2, 0.7, 1.5, 3.0, 9.0], vec![1.0, -2.0, 2.0, 0.0, 0.25]).unwrap();
        let l = retract_l(&f, base).unwrap();
        assert_eq!(coretract_m(&l.scores, &l.pieces, f.dim(), base).unwrap(), f.canonical());
        let zero = retract_l(&RadialStepFunction::zero(2), base).unwrap();
        assert!(zero.scores.is_empty());
    }

    #[test]
    fn rejects_escaping_witness() {
        let base = LorentzParams::new(2.0, 2.0).unwrap();
        let w = RadialStepFunction::indicator_shell(1, 0.5, 1.5).unwrap();
        assert!(coretract_m(&WeightedSeq::unit(0), &[(0, w)], 1, base).is_err());
    }
}
