//! Weighted sequence spaces, K-functionals and real-interpolation norms.

pub mod kfunc;
pub mod norm;
pub mod retract;
pub mod seq;
pub mod verify;

pub use kfunc::{Base, CoupleSpec, KCurve};
pub use norm::{interpolation_norm, InterpNorm, InterpolationParams};
pub use retract::{coretract_m, retract_l, Retract};
pub use seq::WeightedSeq;
pub use verify::{verify_interpolation, InterpSetup, InterpSuite, Member, VerifyReport};
