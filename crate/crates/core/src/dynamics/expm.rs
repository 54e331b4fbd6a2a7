//! Matrix exponential by scaling and squaring with a truncated Taylor kernel.

use crate::linalg::{c, SuperMatrix};

const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 40;

/// Induced 1-norm (largest column sum of moduli).
pub fn norm_one(a: &SuperMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)`.
///
/// `a` is scaled by `2^-s` until its 1-norm is at most 1/2, the Taylor series
/// is summed until the next term no longer changes the result at double
/// precision, and the result is squared `s` times.
pub fn expm(a: &SuperMatrix) -> SuperMatrix {
    let norm = norm_one(a);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * c(0.5f64.powi(squarings));

    let mut sum = SuperMatrix::identity();
    let mut term = SuperMatrix::identity();
    for k in 1..=MAX_TERMS {
        term = term * scaled * c(1.0 / k as f64);
        sum += term;
        if norm_one(&term) <= f64::EPSILON * 1e-3 * norm_one(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
