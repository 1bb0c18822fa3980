//! Finitely supported nonnegative sequences indexed by annuli, and the
//! weighted norms `||y||_{l_q^a} = (sum_u (2^{ua} y_u)^q)^{1/q}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i32, f64)>", into = "Vec<(i32, f64)>")]
pub struct WeightedSeq {
    entries: BTreeMap<i32, f64>,
}

// serialized as `[[u, y_u], ...]`
impl TryFrom<Vec<(i32, f64)>> for WeightedSeq {
    type Error = Error;
    fn try_from(pairs: Vec<(i32, f64)>) -> Result<Self> {
        WeightedSeq::new(pairs)
    }
}

impl From<WeightedSeq> for Vec<(i32, f64)> {
    fn from(y: WeightedSeq) -> Self {
        y.entries.into_iter().collect()
    }
}

impl WeightedSeq {
    /// Zero entries are dropped.
    pub fn new(entries: impl IntoIterator<Item = (i32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (u, y) in entries {
            if u < -1 {
                return Err(Error::InvalidParams(format!("sequence index {u} < -1")));
            }
            if !(y >= 0.0 && y.is_finite()) {
                return Err(Error::InvalidParams(format!("entry at {u} must be finite and >= 0, got {y}")));
            }
            if y > 0.0 {
                *map.entry(u).or_insert(0.0) += y;
            }
        }
        Ok(Self { entries: map })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `e_u`.
    pub fn unit(u: i32) -> Self {
        Self::new([(u, 1.0)]).unwrap()
    }

    pub fn get(&self, u: i32) -> f64 {
        self.entries.get(&u).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.entries.iter().map(|(&u, &y)| (u, y))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::new(self.iter().map(|(u, y)| (u, alpha.abs() * y))).unwrap()
    }

    /// `(sum_u (2^{ua} y_u)^q)^{1/q}`, sup form at `q = inf`.
    pub fn ell_norm(&self, a: f64, q: f64) -> f64 {
        weighted_norm(self.iter(), a, q)
    }
}

/// Weighted `l_q^a` norm of `(u, y_u)` pairs; `q` may be any positive exponent.
pub fn weighted_norm(entries: impl Iterator<Item = (i32, f64)>, a: f64, q: f64) -> f64 {
    let weighted = entries.map(|(u, y)| (u as f64 * a).exp2() * y);
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_norm_examples() {
        assert_eq!(WeightedSeq::unit(3).ell_norm(0.5, 2.0), 2f64.powf(1.5));
        let y = WeightedSeq::new([(-1, 1.0), (0, 1.0), (1, 1.0)]).unwrap();
        assert_eq!(y.ell_norm(1.0, 1.0), 3.5);
        assert_eq!(y.ell_norm(1.0, f64::INFINITY), 2.0);
        let z = WeightedSeq::new([(0, 3.0), (4, 4.0)]).unwrap();
        assert!((z.ell_norm(0.0, 2.0) - 5.0).abs() < 1e-15);
        assert_eq!(WeightedSeq::zero().ell_norm(1.0, 1.0), 0.0);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(WeightedSeq::new([(-2, 1.0)]).is_err());
        assert!(WeightedSeq::new([(0, -1.0)]).is_err());
        assert!(serde_json::from_str::<WeightedSeq>("[[0, -1.0]]").is_err());
        let y: WeightedSeq = serde_json::from_str("[[-1, 1.0], [2, 0.5]]").unwrap();
        assert_eq!(y.get(2), 0.5);
    }
}
