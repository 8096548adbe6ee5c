//! Whittle estimation: periodogram-based likelihood with the innovation
//! variance profiled out, quasi-Newton fitting with fixed parameters,
//! Hessian standard errors, residuals and AIC order selection.

use crate::asymp_cov::fisher_matrix;
use crate::error::{ArfimaError, Result};
use crate::model::{check_parameters, pi_coefficients, ArfimaModel, TimeSeries, D_MAX, D_MIN};
use crate::optim::{minimize, numeric_hessian, BfgsOptions};
use crate::spectral::{periodogram, spectral_shape, Periodogram};
use crate::special::{chi_square_sf, normal_sf};
use crate::par;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Margin keeping the logistic image of d strictly inside (-1, 0.5).
pub const D_MARGIN: f64 = 1e-4;

/// Starting values for d tried when the first optimization fails.
pub const RESTART_D: [f64; 3] = [-0.45, 0.1, 0.4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ArfimaModel,
    /// Standard errors from the numerical Hessian; 0 for fixed parameters,
    /// NaN when the Hessian is not positive definite.
    pub stderr_hessian: Vec<f64>,
    /// Standard errors from the exact asymptotic covariance at the estimate.
    pub stderr_exact: Vec<f64>,
    pub hessian_ok: bool,
    /// Value of the per-observation Whittle objective at the optimum.
    pub loglik: f64,
    pub aic: f64,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub fixed_mask: Vec<bool>,
    pub n: usize,
}

impl FitReport {
    pub fn t_values(&self) -> Vec<f64> {
        self.model.params().iter().zip(&self.stderr_hessian).map(|(e, s)| e / s).collect()
    }

    /// Two-sided normal p-values of the Hessian t-ratios.
    pub fn p_values(&self) -> Vec<f64> {
        self.t_values().iter().map(|t| 2.0 * normal_sf(t.abs())).collect()
    }
}

fn shapes(model: &ArfimaModel, pgram: &Periodogram) -> Vec<f64> {
    let (ar, ma) = (model.ar_poly(), model.ma_poly());
    pgram.frequencies.iter().map(|&l| spectral_shape(model.d, &ar, &ma, l)).collect()
}

/// `σ̂² = (2π/m) Σ_j I(λ_j) / g(λ_j)`, the minimizer of the Whittle objective
/// in σ². The `sigma2` field of `model` is ignored.
pub fn profile_sigma2(model: &ArfimaModel, pgram: &Periodogram) -> Result<f64> {
    if !check_parameters(model).passes() {
        return Err(ArfimaError::NotStationary(format!("invalid model {model:?}")));
    }
    if pgram.is_empty() {
        return Err(ArfimaError::InsufficientData("empty periodogram".into()));
    }
    let g = shapes(model, pgram);
    let m = pgram.len() as f64;
    Ok(2.0 * PI / m * pgram.ordinates.iter().zip(&g).map(|(i, g)| i / g).sum::<f64>())
}

/// Profiled Whittle log-likelihood
/// `L = -(1/2n) [Σ_j log f(λ_j) + Σ_j I(λ_j)/f(λ_j)]` evaluated at
/// `σ² = σ̂²`. Returns `-∞` for parameters outside the valid region and for a
/// degenerate (all-zero) periodogram.
pub fn whittle_loglik(model: &ArfimaModel, pgram: &Periodogram) -> f64 {
    if pgram.is_empty() || !check_parameters(model).passes() {
        return f64::NEG_INFINITY;
    }
    let g = shapes(model, pgram);
    if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let m = pgram.len() as f64;
    let s2 = 2.0 * PI / m * pgram.ordinates.iter().zip(&g).map(|(i, g)| i / g).sum::<f64>();
    if !(s2 > 0.0) {
        return f64::NEG_INFINITY;
    }
    let c = (s2 / (2.0 * PI)).ln();
    let sum_log: f64 = g.iter().map(|v| c + v.ln()).sum();
    -(sum_log + m) / (2.0 * pgram.n as f64)
}

fn d_from_internal(z: f64) -> f64 {
    let (lo, hi) = (D_MIN + D_MARGIN, D_MAX - D_MARGIN);
    lo + (hi - lo) / (1.0 + (-z).exp())
}

fn d_to_internal(d: f64) -> f64 {
    let (lo, hi) = (D_MIN + D_MARGIN, D_MAX - D_MARGIN);
    let u = ((d - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
    (u / (1.0 - u)).ln()
}

/// Maps between the free-parameter vector used by the optimizer and the full
/// (d, φ, θ) vector.
struct Layout {
    p: usize,
    q: usize,
    fixed: Vec<Option<f64>>,
    free: Vec<usize>,
}

impl Layout {
    fn new(p: usize, q: usize, fixed: &[(usize, f64)]) -> Result<Self> {
        let k = 1 + p + q;
        let mut slots = vec![None; k];
        for &(i, v) in fixed {
            if i >= k {
                return Err(ArfimaError::Domain(format!("fixed index {i} out of range for {k} parameters")));
            }
            if !v.is_finite() {
                return Err(ArfimaError::Domain(format!("fixed value for parameter {i} is not finite")));
            }
            if i == 0 && !(v > D_MIN && v < D_MAX) {
                return Err(ArfimaError::Domain(format!("fixed d = {v} outside (-1, 0.5)")));
            }
            slots[i] = Some(v);
        }
        let free = (0..k).filter(|&i| slots[i].is_none()).collect();
        Ok(Self { p, q, fixed: slots, free })
    }

    /// Full parameter vector from free values given on the natural scale.
    fn full(&self, free_vals: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (&i, &v) in self.free.iter().zip(free_vals) {
            out[i] = v;
        }
        out
    }

    fn natural(&self, internal: &[f64]) -> Vec<f64> {
        self.free.iter().zip(internal).map(|(&i, &z)| if i == 0 { d_from_internal(z) } else { z }).collect()
    }

    fn internal(&self, natural: &[f64]) -> Vec<f64> {
        self.free.iter().zip(natural).map(|(&i, &v)| if i == 0 { d_to_internal(v) } else { v }).collect()
    }

    fn model(&self, free_vals: &[f64]) -> ArfimaModel {
        ArfimaModel::from_params(&self.full(free_vals), self.p, self.q, 1.0)
    }
}

/// Whittle estimate of an ARFIMA(p, d, q) model. `fixed` holds
/// `(index, value)` pairs in the (d, φ, θ) ordering that are kept constant.
///
/// A failed optimization does not raise an error; the report carries
/// `converged = false`.
pub fn whittle_fit(series: &TimeSeries, p: usize, q: usize, fixed: &[(usize, f64)]) -> Result<FitReport> {
    let n = series.len();
    let k = 1 + p + q;
    if n <= 10 * k {
        return Err(ArfimaError::InsufficientData(format!("{n} observations for {k} parameters; need more than {}", 10 * k)));
    }
    let layout = Layout::new(p, q, fixed)?;
    let pgram = periodogram(series);
    if pgram.ordinates.iter().all(|&v| v == 0.0) {
        return Err(ArfimaError::Numerical("periodogram is identically zero (constant series)".into()));
    }

    let objective = |z: &[f64]| {
        let l = whittle_loglik(&layout.model(&layout.natural(z)), &pgram);
        if l.is_finite() {
            -l
        } else {
            f64::INFINITY
        }
    };
    let start = |d0: f64| -> Vec<f64> {
        let nat: Vec<f64> = layout.free.iter().map(|&i| if i == 0 { d0 } else { 0.0 }).collect();
        layout.internal(&nat)
    };

    let opts = BfgsOptions::default();
    let mut best = minimize(objective, &start(0.1), opts);
    let mut iterations = best.iterations;
    if !best.converged && layout.free.contains(&0) {
        for d0 in RESTART_D {
            let run = minimize(objective, &start(d0), opts);
            iterations += run.iterations;
            let better = (run.converged && !best.converged) || (run.converged == best.converged && run.value < best.value);
            if better {
                best = run;
            }
        }
    }

    let free_hat = layout.natural(&best.x);
    let mut model = layout.model(&free_hat);
    model.sigma2 = profile_sigma2(&model, &pgram)?;
    let loglik = whittle_loglik(&model, &pgram);

    let (stderr_hessian, hessian_ok) = hessian_stderr(
        |x: &[f64]| {
            let l = whittle_loglik(&layout.model(x), &pgram);
            if l.is_finite() {
                -2.0 * n as f64 * l
            } else {
                f64::NAN
            }
        },
        &free_hat,
    );
    let stderr_exact = exact_free_stderr(&model, &layout.free, n);
    let expand = |se: &[f64]| {
        let mut out = vec![0.0; k];
        for (&i, &s) in layout.free.iter().zip(se) {
            out[i] = s;
        }
        out
    };

    Ok(FitReport {
        residuals: residuals(&model, series)?,
        aic: aic(loglik, n, k),
        stderr_hessian: expand(&stderr_hessian),
        stderr_exact: expand(&stderr_exact),
        hessian_ok,
        loglik,
        converged: best.converged,
        iterations,
        fixed_mask: layout.fixed.iter().map(Option::is_some).collect(),
        n,
        model,
    })
}

/// `AIC = -2 [n L - (n/2) log 2π - k]`.
pub fn aic(loglik: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    let total = n * loglik - 0.5 * n * (2.0 * PI).ln();
    -2.0 * (total - k as f64)
}

fn exact_free_stderr(model: &ArfimaModel, free: &[usize], n: usize) -> Vec<f64> {
    let nan = vec![f64::NAN; free.len()];
    let Ok(c) = fisher_matrix(model) else { return nan };
    let m = free.len();
    let sub = DMatrix::from_fn(m, m, |a, b| c.info[free[a]][free[b]]);
    match sub.cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            (0..m).map(|i| (inv[(i, i)] / n as f64).sqrt()).collect()
        }
        None => nan,
    }
}

/// `SE_i = sqrt([H^{-1}]_ii)` with `H` the central-difference Hessian of
/// `objective` (a negative log-likelihood) at `x_hat`. Returns NaN entries
/// and `false` when `H` is not positive definite.
pub fn hessian_stderr<F: Fn(&[f64]) -> f64>(objective: F, x_hat: &[f64]) -> (Vec<f64>, bool) {
    let k = x_hat.len();
    if k == 0 {
        return (Vec::new(), true);
    }
    let h = numeric_hessian(&objective, x_hat);
    if h.iter().any(|v| !v.is_finite()) {
        return (vec![f64::NAN; k], false);
    }
    match h.cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            ((0..k).map(|i| inv[(i, i)].sqrt()).collect(), true)
        }
        None => (vec![f64::NAN; k], false),
    }
}

/// `ε̂_t = Σ_{j=0}^{t-1} π_j (y_{t-j} - ȳ)`.
pub fn residuals(model: &ArfimaModel, series: &TimeSeries) -> Result<Vec<f64>> {
    let y = series.demeaned();
    let n = y.len();
    let pi = pi_coefficients(model, n - 1)?;
    Ok(par::map_range(n, |t| (0..=t).map(|j| pi[j] * y[t - j]).sum()))
}

/// Sample autocorrelations `r_1..r_h` of the demeaned sequence.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    (1..=max_lag)
        .map(|k| if k >= n || c0 == 0.0 { 0.0 } else { c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / c0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxRow {
    pub lag: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(h) = n(n+2) Σ_{k≤h} r_k² / (n-k)` for each `h` given autocorrelations
/// `r_1..r_H`.
pub fn ljung_box_from_acf(acf: &[f64], n: usize) -> Vec<LjungBoxRow> {
    let nf = n as f64;
    let mut q = 0.0;
    acf.iter()
        .enumerate()
        .map(|(i, r)| {
            let lag = i + 1;
            q += r * r / (nf - lag as f64);
            let statistic = nf * (nf + 2.0) * q;
            LjungBoxRow { lag, statistic, p_value: chi_square_sf(statistic, lag as f64) }
        })
        .collect()
}

pub fn ljung_box(residuals: &[f64], max_lag: usize) -> Result<Vec<LjungBoxRow>> {
    let n = residuals.len();
    if max_lag == 0 || 4 * max_lag >= n {
        return Err(ArfimaError::Domain(format!("max_lag must be in 1..n/4 (n = {n}), got {max_lag}")));
    }
    Ok(ljung_box_from_acf(&sample_acf(residuals, max_lag), n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub p: usize,
    pub q: usize,
    pub aic: f64,
    pub d_hat: f64,
    pub p_value_d: f64,
    pub converged: bool,
    /// Set when the fit raised an error; the row then sorts last.
    pub error: Option<String>,
}

/// Fits every (p, q) with `p <= p_max`, `q <= q_max`; rows sorted by AIC.
pub fn model_selection(series: &TimeSeries, p_max: usize, q_max: usize) -> Result<Vec<SelectionRow>> {
    if p_max > 5 || q_max > 5 {
        return Err(ArfimaError::Domain("p_max and q_max must be at most 5".into()));
    }
    let orders: Vec<(usize, usize)> = (0..=p_max).flat_map(|p| (0..=q_max).map(move |q| (p, q))).collect();
    let mut rows = par::map_slice(&orders, |&(p, q)| match whittle_fit(series, p, q, &[]) {
        Ok(fit) => SelectionRow {
            p,
            q,
            aic: fit.aic,
            d_hat: fit.model.d,
            p_value_d: fit.p_values()[0],
            converged: fit.converged,
            error: None,
        },
        Err(e) => SelectionRow {
            p,
            q,
            aic: f64::INFINITY,
            d_hat: f64::NAN,
            p_value_d: f64::NAN,
            converged: false,
            error: Some(e.to_string()),
        },
    });
    rows.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    Ok(rows)
}
