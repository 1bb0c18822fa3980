//! Hilbert transform `Hf(x) = (1/pi) p.v. int f(y)/(x - y) dy` of a grid step function.
//!
//! Each cell integrates exactly against the kernel:
//! `int_{e_j}^{e_{j+1}} dy/(x - y) = ln|x - e_j| - ln|x - e_{j+1}|`, and the
//! same expression is the principal value when `x` lies inside the cell. At
//! cell centres the weights only depend on `i - j`:
//! `k_d = ln|(2d + 1)/(2d - 1)|`, odd in `d` with `k_0 = 0`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::operators::grid::GridFunction1D;

/// Kernel weights `k_d` for `d = 0..n`.
fn centre_weights(n: usize) -> Vec<f64> {
    let mut k = vec![0.0; n];
    for (d, w) in k.iter_mut().enumerate().skip(1) {
        let d = d as f64;
        *w = ((2.0 * d + 1.0) / (2.0 * d - 1.0)).ln();
    }
    k
}

/// `Hf` at the cell centres.
pub fn hilbert_transform(f: &GridFunction1D) -> GridFunction1D {
    let n = f.cells();
    let k = centre_weights(n);
    let v = f.values();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            // j < i: d = i - j > 0
            for (j, &vj) in v[..i].iter().enumerate() {
                acc += vj * k[i - j];
            }
            for (j, &vj) in v.iter().enumerate().skip(i + 1) {
                acc -= vj * k[j - i];
            }
            acc / PI
        })
        .collect();
    GridFunction1D::new(f.half_width(), out).expect("finite sums")
}

/// `Hf(x)` at an arbitrary point; infinite on a jump of `f`.
pub fn hilbert_at(f: &GridFunction1D, x: f64) -> f64 {
    let mut acc = 0.0;
    let mut log_coeff = 0.0;
    for (j, &vj) in f.values().iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        let (a, b) = (x - f.edge(j), x - f.edge(j + 1));
        // ln 0 terms cancel between neighbours with equal values
        if a == 0.0 {
            log_coeff += vj;
        } else {
            acc += vj * a.abs().ln();
        }
        if b == 0.0 {
            log_coeff -= vj;
        } else {
            acc -= vj * b.abs().ln();
        }
    }
    if log_coeff != 0.0 {
        return f64::INFINITY.copysign(-log_coeff);
    }
    acc / PI
}

/// `int |f(y)| / |x - y| dy` for `x` off the support of `f`.
pub fn size_integral(f: &GridFunction1D, x: f64) -> f64 {
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| v.abs() * ((x - f.edge(j)) / (x - f.edge(j + 1))).abs().ln().abs())
        .sum()
}
