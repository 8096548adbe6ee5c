//! Special functions and reference distributions.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use std::f64::consts::PI;

/// `ln|Γ(x)|` together with the sign of `Γ(x)`; valid for any non-pole `x`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        (statrs::function::gamma::ln_gamma(x), 1.0)
    } else {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let s = (PI * x).sin();
        let lg = PI.ln() - s.abs().ln() - statrs::function::gamma::ln_gamma(1.0 - x);
        (lg, s.signum())
    }
}

/// Γ(x) for any non-pole real argument.
pub fn gamma(x: f64) -> f64 {
    let (lg, s) = ln_gamma_signed(x);
    s * lg.exp()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper tail `P(Z > z)` of the standard normal, accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}
