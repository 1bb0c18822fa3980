//! Fixed inputs shared by the benchmarks.

use lhlab_core::operators::GridFunction1D;
use lhlab_core::RadialStepFunction;

/// Alternating-sign grid function with `cells` cells on `[-8, 8]`.
pub fn grid(cells: usize) -> GridFunction1D {
    let values = (0..cells).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    GridFunction1D::new(8.0, values).expect("valid grid")
}

/// Radial step function with `shells` dyadic shells spanning many annuli.
pub fn radial(dim: u32, shells: usize) -> RadialStepFunction {
    let mut radii = vec![0.0];
    let mut values = Vec::with_capacity(shells);
    for i in 0..shells {
        radii.push((i as f64 / 4.0 - 6.0).exp2());
        values.push(1.0 + (i % 5) as f64);
    }
    RadialStepFunction::new(dim, radii, values).expect("valid function")
}
