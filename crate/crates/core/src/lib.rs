//! Step-function laboratory for Lorentz, Lorentz-Herz and real-interpolation norms.

pub mod error;
pub mod corpus;
pub mod geometry;
pub mod herz;
pub mod interp;
pub mod lorentz;
pub mod operators;
pub mod quad;
pub mod rearrange;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use lorentz::LorentzParams;
pub use rearrange::{RadialStepFunction, StepRearrangement};
