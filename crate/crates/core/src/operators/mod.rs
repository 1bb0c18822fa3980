//! Size-condition operators on grid step functions in one dimension and the
//! empirical boundedness experiments built on them.

pub mod grid;
pub mod hilbert;
pub mod maximal;
pub mod size;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::GridFunction1D;
pub use hilbert::{hilbert_at, hilbert_transform};
pub use maximal::{maximal_at, maximal_operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    Maximal,
    Hilbert,
}

impl Operator {
    pub fn apply(self, f: &GridFunction1D) -> GridFunction1D {
        match self {
            Operator::Maximal => maximal_operator(f),
            Operator::Hilbert => hilbert_transform(f),
        }
    }

    /// `Tf(x)` at one point.
    pub fn at(self, f: &GridFunction1D, x: f64) -> f64 {
        match self {
            Operator::Maximal => maximal_at(f, &[x])[0],
            Operator::Hilbert => hilbert_at(f, x),
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Operator::Hilbert)
    }

    /// Whether the operator is known bounded on `L^{p,r}`; the Herz sweep
    /// relies on it.
    pub fn lorentz_bounded(self, r: f64) -> bool {
        match self {
            Operator::Maximal => true,
            Operator::Hilbert => r.is_finite(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Maximal => "maximal",
            Operator::Hilbert => "hilbert",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximal" => Ok(Operator::Maximal),
            "hilbert" => Ok(Operator::Hilbert),
            _ => Err(Error::InvalidParams(format!("unknown operator `{s}` (expected maximal or hilbert)"))),
        }
    }
}
