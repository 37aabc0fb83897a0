//! Directional statistics for wrapped phases.
//!
//! All phases in this crate live on the half-open interval (-π, π].

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// Wrap an angle into (-π, π].
pub fn wrap_phase(theta: f64) -> f64 {
    let mut w = theta.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w <= -PI {
        w += TAU;
    }
    w
}

/// Shortest angular distance between two phases, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Two-argument arctangent with `atan2(0, 0) = 0` regardless of the sign of zero.
///
/// `f64::atan2(0.0, -0.0)` is π; dead pixels should map to a deterministic 0.
pub fn arctan2(y: f64, x: f64) -> f64 {
    if y == 0.0 && x == 0.0 {
        0.0
    } else {
        y.atan2(x)
    }
}

/// Sum of unit phasors.
pub fn resultant<I: IntoIterator<Item = f64>>(angles: I) -> (Complex64, usize) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = 0;
    for a in angles {
        sum += Complex64::from_polar(1.0, a);
        n += 1;
    }
    (sum, n)
}

/// Argument of the resultant vector; 0 for an empty input or a vanishing resultant.
pub fn circular_mean<I: IntoIterator<Item = f64>>(angles: I) -> f64 {
    let (sum, _) = resultant(angles);
    arctan2(sum.im, sum.re)
}

/// Mean resultant length R̄ in [0, 1]. Returns 0 for an empty input.
pub fn mean_resultant_length<I: IntoIterator<Item = f64>>(angles: I) -> f64 {
    let (sum, n) = resultant(angles);
    if n == 0 {
        0.0
    } else {
        (sum.norm() / n as f64).min(1.0)
    }
}

/// Circular standard deviation `sqrt(-2 ln R̄)`. Infinite when R̄ = 0.
pub fn circular_std<I: IntoIterator<Item = f64>>(angles: I) -> f64 {
    let r = mean_resultant_length(angles);
    (-2.0 * r.ln()).max(0.0).sqrt()
}
