//! Model spectral density and the sample periodogram.

use crate::error::{ArfimaError, Result};
use crate::model::{check_parameters, ArfimaModel, TimeSeries};
use crate::par;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this length the periodogram is computed by the direct DFT sum.
pub const DIRECT_SUM_THRESHOLD: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub n: usize,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// `|P(e^{-iλ})|²` for ascending polynomial coefficients.
pub(crate) fn poly_sq_modulus(coeffs: &[f64], lambda: f64) -> f64 {
    let z = Complex64::from_polar(1.0, -lambda);
    crate::poly::eval(coeffs, z).norm_sqr()
}

/// Spectral shape `g(λ)` with `f(λ) = σ² g(λ) / 2π`, without validity checks:
/// `(2 sin(λ/2))^{-2d} |Θ(e^{-iλ})|² / |Φ(e^{-iλ})|²`.
pub(crate) fn spectral_shape(d: f64, ar_poly: &[f64], ma_poly: &[f64], lambda: f64) -> f64 {
    let lambda = lambda.abs();
    let arma = poly_sq_modulus(ma_poly, lambda) / poly_sq_modulus(ar_poly, lambda);
    if d == 0.0 {
        return arma;
    }
    let s = 2.0 * (0.5 * lambda).sin();
    if s == 0.0 {
        return if d > 0.0 { f64::INFINITY } else { 0.0 };
    }
    s.powf(-2.0 * d) * arma
}

/// `f(λ) = (σ²/2π) (2 sin(λ/2))^{-2d} |Θ(e^{-iλ})|² / |Φ(e^{-iλ})|²`.
///
/// Even in λ. At λ = 0 returns `+∞` for `d > 0` and `0` for `d < 0`.
pub fn spectral_density(model: &ArfimaModel, lambda: f64) -> Result<f64> {
    if !check_parameters(model).passes() {
        return Err(ArfimaError::NotStationary(format!("invalid model {model:?}")));
    }
    Ok(model.sigma2 / (2.0 * PI) * spectral_shape(model.d, &model.ar_poly(), &model.ma_poly(), lambda))
}

/// Spectral density over a grid of frequencies.
pub fn spectral_density_grid(model: &ArfimaModel, lambdas: &[f64]) -> Result<Vec<f64>> {
    if !check_parameters(model).passes() {
        return Err(ArfimaError::NotStationary(format!("invalid model {model:?}")));
    }
    let (ar, ma) = (model.ar_poly(), model.ma_poly());
    let c = model.sigma2 / (2.0 * PI);
    Ok(par::map_slice(lambdas, |&l| c * spectral_shape(model.d, &ar, &ma, l)))
}

/// `λ_j = 2πj/n` for `j = 1..⌊(n-1)/2⌋`; zero and Nyquist frequencies excluded.
pub fn fourier_frequencies(n: usize) -> Vec<f64> {
    let m = n.saturating_sub(1) / 2;
    (1..=m).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// `|Σ_t y_t e^{iλ_j t}|²` for `j = 1..m` by the O(n m) direct sum.
pub(crate) fn dft_power_direct(y: &[f64], m: usize) -> Vec<f64> {
    let n = y.len();
    (1..=m)
        .map(|j| {
            let w = 2.0 * PI * j as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in y.iter().enumerate() {
                let a = w * (t + 1) as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            re * re + im * im
        })
        .collect()
}

fn dft_power_fft(y: &[f64], m: usize) -> Vec<f64> {
    let n = y.len();
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    buf[1..=m].iter().map(|c| c.norm_sqr()).collect()
}

/// `I(λ_j) = |Σ_{t=1}^n ỹ_t e^{iλ_j t}|² / (2πn)` of the demeaned series at
/// [`fourier_frequencies`]. Uses a mixed-radix FFT for `n >= 64`.
pub fn periodogram(series: &TimeSeries) -> Periodogram {
    let y = series.demeaned();
    periodogram_of_demeaned(&y)
}

pub(crate) fn periodogram_of_demeaned(y: &[f64]) -> Periodogram {
    let n = y.len();
    let frequencies = fourier_frequencies(n);
    let m = frequencies.len();
    let power = if n < DIRECT_SUM_THRESHOLD { dft_power_direct(y, m) } else { dft_power_fft(y, m) };
    let scale = 1.0 / (2.0 * PI * n as f64);
    Periodogram { frequencies, ordinates: power.into_iter().map(|p| p * scale).collect(), n }
}
