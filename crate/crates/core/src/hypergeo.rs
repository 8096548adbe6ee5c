//! Gauss hypergeometric series `₂F₁(a, b; c; x)` for `|x| < 1`.

use crate::error::{ArfimaError, Result};
use num_complex::Complex64;

const REL_TOL: f64 = 1e-14;
pub const MAX_TERMS: usize = 100_000;

fn check_c(c: f64) -> Result<()> {
    if c <= 0.0 && c == c.round() {
        return Err(ArfimaError::Domain(format!("c = {c} is a non-positive integer")));
    }
    Ok(())
}

/// Index after which the term ratio `(a+k)(b+k)x/((c+k)(k+1))` no longer
/// passes through sign changes or near-zero factors.
fn settle_index(a: f64, b: f64, c: f64) -> usize {
    (-a).max(-b).max(-c).max(0.0).ceil() as usize + 1
}

/// `Σ_k (a)_k (b)_k / ((c)_k k!) x^k`.
///
/// Summation stops once the current term, inflated by the geometric tail
/// bound `1 / (1 - |x|)`, falls below `1e-14 |partial sum|`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(ArfimaError::Domain(format!("series diverges for |x| = {} >= 1", x.abs())));
    }
    check_c(c)?;
    let settle = settle_index(a, b, c);
    let tail = 1.0 / (1.0 - x.abs());
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term == 0.0 || (k >= settle && term.abs() * tail < REL_TOL * sum.abs()) {
            return Ok(sum);
        }
    }
    Err(ArfimaError::SeriesDiverged(MAX_TERMS))
}

/// Complex-argument variant used for complex AR inverse roots.
pub fn gauss_2f1_complex(a: f64, b: f64, c: f64, x: Complex64) -> Result<Complex64> {
    let r = x.norm();
    if !(r < 1.0) {
        return Err(ArfimaError::Domain(format!("series diverges for |x| = {r} >= 1")));
    }
    check_c(c)?;
    let settle = settle_index(a, b, c);
    let tail = 1.0 / (1.0 - r);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.norm() == 0.0 || (k >= settle && term.norm() * tail < REL_TOL * sum.norm()) {
            return Ok(sum);
        }
    }
    Err(ArfimaError::SeriesDiverged(MAX_TERMS))
}
