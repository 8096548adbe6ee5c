//! Autocovariance of ARFIMA processes: closed-form FN(d), exact Sowell
//! evaluation for general (p, d, q), the hyperbolic tail approximation and
//! the variance of the sample mean.

use crate::error::{ArfimaError, Result};
use crate::model::{d_in_range, has_repeated, require_valid, ArfimaModel};
use crate::poly::polynomial_roots;
use crate::special::{gamma, ln_gamma};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Lag beyond which [`acvf_hybrid`] switches to the tail approximation.
pub const DEFAULT_SWITCH_LAG: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcvfMethod {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcvfResult {
    pub lags: Vec<usize>,
    pub gamma: Vec<f64>,
    pub method_per_lag: Vec<AcvfMethod>,
}

impl AcvfResult {
    fn exact(gamma: Vec<f64>) -> Self {
        let n = gamma.len();
        Self { lags: (0..n).collect(), gamma, method_per_lag: vec![AcvfMethod::Exact; n] }
    }

    /// Autocorrelations `γ(h) / γ(0)`.
    pub fn acf(&self) -> Vec<f64> {
        let g0 = self.gamma[0];
        self.gamma.iter().map(|g| g / g0).collect()
    }
}

/// `γ₀(0) = σ² Γ(1-2d) / Γ(1-d)²` of FN(d).
fn fd_variance(d: f64, sigma2: f64) -> f64 {
    sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp()
}

/// `γ₀(0..=h_max)` of FN(d) by `γ₀(h) = γ₀(h-1) (h-1+d) / (h-d)`.
pub fn acvf_fd_sequence(d: f64, sigma2: f64, h_max: usize) -> Result<Vec<f64>> {
    if !d_in_range(d) {
        return Err(ArfimaError::Domain(format!("d = {d} outside (-1, 0.5)")));
    }
    let mut out = Vec::with_capacity(h_max + 1);
    if d == 0.0 {
        out.push(sigma2);
        out.resize(h_max + 1, 0.0);
        return Ok(out);
    }
    out.push(fd_variance(d, sigma2));
    for h in 1..=h_max {
        let hf = h as f64;
        let prev = out[h - 1];
        out.push(prev * (hf - 1.0 + d) / (hf - d));
    }
    Ok(out)
}

/// `γ₀(h) = σ² Γ(1-2d) Γ(h+d) / [Γ(1-d) Γ(d) Γ(1+h-d)]` of FN(d).
pub fn acvf_fd(d: f64, sigma2: f64, h: usize) -> Result<f64> {
    Ok(acvf_fd_sequence(d, sigma2, h)?[h])
}

/// Table of the unit-variance FN autocovariance `γ₀(k)/σ²`, even in `k`.
struct FdTable(Vec<f64>);

impl FdTable {
    fn get(&self, k: i64) -> f64 {
        self.0[k.unsigned_abs() as usize]
    }
}

/// `ψ(i) = Σ_k θ_k θ_{k-i}` for `i = -q..=q` (index `i + q`), `θ_0 = 1`.
fn ma_autocorrelation_sums(ma_poly: &[f64]) -> Vec<f64> {
    let q = ma_poly.len() as i64 - 1;
    (-q..=q)
        .map(|i| {
            let lo = i.max(0);
            let hi = q.min(q + i);
            (lo..=hi).map(|k| ma_poly[k as usize] * ma_poly[(k - i) as usize]).sum()
        })
        .collect()
}

/// Inverse AR roots `ρ_j` with `Φ(z) = Π (1 - ρ_j z)`.
fn inverse_ar_roots(ar_poly: &[f64]) -> Vec<Complex64> {
    polynomial_roots(ar_poly).into_iter().map(|z| z.inv()).collect()
}

/// `ξ_j = [ρ_j Π_i (1 - ρ_i ρ_j) Π_{k≠j} (ρ_j - ρ_k)]^{-1}`.
fn xi_weights(rho: &[Complex64]) -> Vec<Complex64> {
    rho.iter()
        .enumerate()
        .map(|(j, &rj)| {
            let mut den = rj;
            for &ri in rho {
                den *= Complex64::new(1.0, 0.0) - ri * rj;
            }
            for (k, &rk) in rho.iter().enumerate() {
                if k != j {
                    den *= rj - rk;
                }
            }
            den.inv()
        })
        .collect()
}

/// Number of terms after which `|ρ|^m` drops below `1e-17`.
fn geometric_terms(rho: f64) -> usize {
    if rho == 0.0 {
        1
    } else {
        ((1e-17f64).ln() / rho.ln()).ceil().max(1.0) as usize + 1
    }
}

/// `C(d, k, ρ)` for every `k` in `k_lo..=k_hi`, where
/// `C(d, k, ρ) = γ̃₀(k) [ρ^{2p} β(k) + β(-k) - 1]` and `β(k) = ₂F₁(d+k, 1; 1-d+k; ρ)`.
///
/// Term `m` of `γ̃₀(k) β(k)` is `ρ^m γ̃₀(k+m)` (the Pochhammer ratio
/// `(d+k)_m / (1-d+k)_m` telescopes to `γ̃₀(k+m)/γ̃₀(k)`), and `γ̃₀(k) β(-k)`
/// likewise sums `ρ^m γ̃₀(k-m)`. Both series are generated for the whole
/// lag window by one-step recursions, each seeded with a directly summed
/// series truncated once `|ρ|^m` is negligible against `max |γ̃₀|`.
fn sowell_c_window(fd: &FdTable, rho: Complex64, p: usize, k_lo: i64, k_hi: i64, tail: usize) -> Vec<Complex64> {
    let width = (k_hi - k_lo + 1) as usize;
    // upper series: U(k) = Σ_m ρ^m γ̃₀(k+m), U(k) = γ̃₀(k) + ρ U(k+1)
    let mut upper = vec![Complex64::new(0.0, 0.0); width];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pw = Complex64::new(1.0, 0.0);
    for m in 0..tail {
        acc += pw * fd.get(k_hi + m as i64);
        pw *= rho;
    }
    upper[width - 1] = acc;
    for idx in (0..width - 1).rev() {
        upper[idx] = fd.get(k_lo + idx as i64) + rho * upper[idx + 1];
    }
    // lower series: L(k) = Σ_m ρ^m γ̃₀(k-m), L(k) = γ̃₀(k) + ρ L(k-1)
    let mut lower = vec![Complex64::new(0.0, 0.0); width];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pw = Complex64::new(1.0, 0.0);
    for m in 0..tail {
        acc += pw * fd.get(k_lo - m as i64);
        pw *= rho;
    }
    lower[0] = acc;
    for idx in 1..width {
        lower[idx] = fd.get(k_lo + idx as i64) + rho * lower[idx - 1];
    }
    let rho2p = rho.powu(2 * p as u32);
    (0..width)
        .map(|idx| rho2p * upper[idx] + lower[idx] - fd.get(k_lo + idx as i64))
        .collect()
}

/// Exact autocovariance of an ARMA(p, q) model (d = 0): `Σ ψ_j ψ_{j+h}` for
/// the first `max(p, q) + 1` lags, then `γ(h) = Σ φ_i γ(h-i)`.
fn arma_acvf(model: &ArfimaModel, h_max: usize) -> Result<Vec<f64>> {
    let p = model.p();
    let q = model.q();
    let rho_max = inverse_ar_roots(&model.ar_poly()).iter().fold(0.0_f64, |m, r| m.max(r.norm()));
    let len = q + geometric_terms(rho_max) + p + 1;
    let psi = crate::model::psi_coefficients(model, len)?;
    let head = p.max(q).min(h_max);
    let mut g: Vec<f64> = (0..=head)
        .map(|h| model.sigma2 * psi.iter().zip(&psi[h..]).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    for h in head + 1..=h_max {
        let v = (1..=p).map(|i| model.ar[i - 1] * g[h.abs_diff(i)]).sum();
        g.push(v);
    }
    Ok(g)
}

/// Exact autocovariance `γ(0..=h_max)` by Sowell's closed form
/// `γ(h) = σ² Σ_{i=-q}^{q} Σ_{j=1}^{p} ψ(i) ξ_j C(d, p+i-h, ρ_j)`;
/// for `p = 0` the reduced form `γ(h) = σ² Σ_i ψ(i) γ̃₀(h - i)`.
///
/// Trailing zero coefficients are trimmed first. AR roots must be simple.
pub fn acvf_sowell(model: &ArfimaModel, h_max: usize) -> Result<AcvfResult> {
    let model = model.trimmed();
    require_valid(&model)?;
    let p = model.p();
    let q = model.q() as i64;
    let psi_ma = ma_autocorrelation_sums(&model.ma_poly());

    if model.d == 0.0 && p > 0 {
        return Ok(AcvfResult::exact(arma_acvf(&model, h_max)?));
    }

    if p == 0 {
        let fd = FdTable(acvf_fd_sequence(model.d, 1.0, h_max + q as usize)?);
        let gamma = (0..=h_max as i64)
            .map(|h| model.sigma2 * (-q..=q).map(|i| psi_ma[(i + q) as usize] * fd.get(h - i)).sum::<f64>())
            .collect();
        return Ok(AcvfResult::exact(gamma));
    }

    let roots = polynomial_roots(&model.ar_poly());
    if has_repeated(&roots) {
        let (i, j) = first_repeated_pair(&roots);
        return Err(ArfimaError::RepeatedArRoot(i, j));
    }
    let rho: Vec<Complex64> = roots.iter().map(|z| z.inv()).collect();
    let xi = xi_weights(&rho);
    let rho_max = rho.iter().fold(0.0_f64, |m, r| m.max(r.norm()));
    let tail = geometric_terms(rho_max);

    let pi = p as i64;
    let k_lo = pi - q - h_max as i64;
    let k_hi = pi + q;
    let reach = (k_hi.unsigned_abs().max(k_lo.unsigned_abs()) as usize) + tail + 1;
    let fd = FdTable(acvf_fd_sequence(model.d, 1.0, reach)?);

    let windows: Vec<Vec<Complex64>> = crate::par::map_slice(&rho, |&r| sowell_c_window(&fd, r, p, k_lo, k_hi, tail));

    let mut gamma = Vec::with_capacity(h_max + 1);
    let mut scale = 0.0_f64;
    for h in 0..=h_max as i64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in windows.iter().enumerate() {
            let mut inner = Complex64::new(0.0, 0.0);
            for i in -q..=q {
                let k = pi + i - h;
                inner += psi_ma[(i + q) as usize] * c[(k - k_lo) as usize];
            }
            acc += xi[j] * inner;
        }
        let v = acc * model.sigma2;
        if h == 0 {
            scale = v.re.abs().max(f64::MIN_POSITIVE);
        }
        if v.im.abs() > 1e-8 * scale {
            return Err(ArfimaError::Numerical(format!("autocovariance at lag {h} has imaginary part {}", v.im)));
        }
        gamma.push(v.re);
    }
    Ok(AcvfResult::exact(gamma))
}

fn first_repeated_pair(roots: &[Complex64]) -> (usize, usize) {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if crate::poly::roots_coincide(roots[i], roots[j]) {
                return (i, j);
            }
        }
    }
    (0, 0)
}

/// Tail constant `c_γ = σ² π^{-1} Γ(1-2d) sin(πd) (Θ(1)/Φ(1))²`, or `None`
/// when `d = 0` (no hyperbolic tail).
pub fn tail_constant(model: &ArfimaModel) -> Option<f64> {
    if model.d == 0.0 {
        return None;
    }
    let d = model.d;
    let gain = model.arma_gain_at_one();
    Some(model.sigma2 / PI * gamma(1.0 - 2.0 * d) * (PI * d).sin() * gain * gain)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticAcvf {
    pub value: f64,
    /// False when `d = 0`: the approximation degenerates and `value` is 0.
    pub long_memory: bool,
}

/// `γ(h) ~ c_γ |h|^{2d-1}`.
pub fn acvf_asymptotic(model: &ArfimaModel, h: usize) -> Result<AsymptoticAcvf> {
    require_valid(model)?;
    Ok(match tail_constant(model) {
        Some(c) => AsymptoticAcvf { value: c * (h as f64).powf(2.0 * model.d - 1.0), long_memory: true },
        None => AsymptoticAcvf { value: 0.0, long_memory: false },
    })
}

/// Exact autocovariance up to `switch_lag` (default 50), the tail
/// approximation beyond it. Short-memory models (d = 0) stay exact.
pub fn acvf_hybrid(model: &ArfimaModel, h_max: usize, switch_lag: Option<usize>) -> Result<AcvfResult> {
    let switch = switch_lag.unwrap_or(DEFAULT_SWITCH_LAG);
    if model.d == 0.0 || h_max <= switch {
        return acvf_sowell(model, h_max);
    }
    let mut res = acvf_sowell(model, switch)?;
    let c = tail_constant(model).expect("d != 0");
    let e = 2.0 * model.d - 1.0;
    for h in switch + 1..=h_max {
        res.lags.push(h);
        res.gamma.push(c * (h as f64).powf(e));
        res.method_per_lag.push(AcvfMethod::Asymptotic);
    }
    Ok(res)
}

/// `Var(ȳ)` for a sample of size `n`: exact
/// `(1/n)[γ(0) + 2 Σ_{j=1}^{n-1} (1 - j/n) γ(j)]`, or asymptotic
/// `n^{2d-1} c_γ / (d (2d + 1))`.
pub fn sample_mean_variance(model: &ArfimaModel, n: usize, exact: bool) -> Result<f64> {
    if n == 0 {
        return Err(ArfimaError::InsufficientData("n must be at least 1".into()));
    }
    if exact {
        let g = acvf_sowell(model, n - 1)?.gamma;
        let nf = n as f64;
        let s: f64 = (1..n).map(|j| (1.0 - j as f64 / nf) * g[j]).sum();
        Ok((g[0] + 2.0 * s) / nf)
    } else {
        require_valid(model)?;
        let c = tail_constant(model)
            .ok_or_else(|| ArfimaError::Domain("asymptotic sample-mean variance requires d != 0".into()))?;
        let d = model.d;
        Ok((n as f64).powf(2.0 * d - 1.0) * c / (d * (2.0 * d + 1.0)))
    }
}
