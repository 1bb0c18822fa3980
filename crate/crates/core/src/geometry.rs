//! Lebesgue measure of balls, shells and dyadic annuli in R^N.

/// Volume of the unit ball in R^N (`omega_1 = 2`, `omega_2 = pi`).
pub fn unit_ball_volume(dim: u32) -> f64 {
    assert!(dim >= 1, "dimension must be positive");
    // omega_N = omega_{N-2} * 2 pi / N
    let mut omega = if dim % 2 == 1 { 2.0 } else { std::f64::consts::PI };
    let mut n = if dim % 2 == 1 { 1 } else { 2 };
    while n < dim {
        n += 2;
        omega *= 2.0 * std::f64::consts::PI / n as f64;
    }
    omega
}

/// Measure of the shell `{inner <= |x| < outer}`.
pub fn shell_measure(dim: u32, inner: f64, outer: f64) -> f64 {
    let n = dim as i32;
    unit_ball_volume(dim) * (outer.powi(n) - inner.powi(n))
}

/// Radius of the ball of measure `measure`.
pub fn ball_radius(dim: u32, measure: f64) -> f64 {
    (measure / unit_ball_volume(dim)).powf(1.0 / dim as f64)
}

/// Inner and outer radius of the dyadic annulus `A_u`, `u >= -1`.
///
/// `A_{-1}` is the ball `|x| < 1/2`; `A_u = {2^{u-1} <= |x| < 2^u}` otherwise.
pub fn annulus_radii(u: i32) -> (f64, f64) {
    assert!(u >= -1, "annulus index must be >= -1");
    if u == -1 {
        (0.0, 0.5)
    } else {
        (2f64.powi(u - 1), 2f64.powi(u))
    }
}

/// `mu(A_u)`: `omega_N 2^{(u-1)N}(2^N - 1)` for `u >= 0`, `omega_N 2^{-N}` for `u = -1`.
pub fn annulus_measure(dim: u32, u: i32) -> f64 {
    let n = dim as i32;
    let omega = unit_ball_volume(dim);
    if u == -1 {
        omega * 2f64.powi(-n)
    } else {
        omega * 2f64.powi((u - 1) * n) * (2f64.powi(n) - 1.0)
    }
}

/// Index of the annulus containing radius `rho >= 0`.
pub fn annulus_index(rho: f64) -> i32 {
    if rho < 0.5 {
        -1
    } else {
        // 2^{u-1} <= rho < 2^u
        let mut u = rho.log2().floor() as i32 + 1;
        // guard rounding at exact powers of two
        while 2f64.powi(u - 1) > rho {
            u -= 1;
        }
        while 2f64.powi(u) <= rho {
            u += 1;
        }
        u
    }
}
