//! The ARFIMA parameter bundle, observed series, coefficient expansions and
//! the stationarity/invertibility check.

use crate::error::{ArfimaError, Result};
use crate::poly::{polynomial_roots, roots_coincide};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Lower and upper (open) bounds of the fractional exponent.
pub const D_MIN: f64 = -1.0;
pub const D_MAX: f64 = 0.5;

pub fn d_in_range(d: f64) -> bool {
    d > D_MIN && d < D_MAX
}

/// ARFIMA(p, d, q): `Φ(B) y_t = Θ(B) (1 - B)^{-d} ε_t` with
/// `Φ(z) = 1 - φ_1 z - ... - φ_p z^p`, `Θ(z) = 1 + θ_1 z + ... + θ_q z^q`
/// and `Var(ε_t) = sigma2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArfimaModel {
    pub d: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sigma2: f64,
}

impl ArfimaModel {
    pub fn new(d: f64, ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !d.is_finite() || ar.iter().chain(ma.iter()).any(|c| !c.is_finite()) {
            return Err(ArfimaError::Domain("parameters must be finite".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(ArfimaError::Domain(format!("innovation variance must be positive, got {sigma2}")));
        }
        Ok(Self { d, ar, ma, sigma2 })
    }

    /// Fractionally differenced noise FN(d).
    pub fn fractional_noise(d: f64, sigma2: f64) -> Result<Self> {
        Self::new(d, Vec::new(), Vec::new(), sigma2)
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    /// Number of mean-structure parameters `1 + p + q` (d, φ, θ).
    pub fn n_params(&self) -> usize {
        1 + self.p() + self.q()
    }

    /// Ascending coefficients of `Φ(z)`.
    pub fn ar_poly(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.ar.iter().map(|c| -c)).collect()
    }

    /// Ascending coefficients of `Θ(z)`.
    pub fn ma_poly(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.ma.iter().copied()).collect()
    }

    /// Parameter vector in the order (d, φ_1..φ_p, θ_1..θ_q).
    pub fn params(&self) -> Vec<f64> {
        std::iter::once(self.d).chain(self.ar.iter().copied()).chain(self.ma.iter().copied()).collect()
    }

    /// Rebuilds a model of the same orders from a parameter vector.
    pub fn with_params(&self, params: &[f64]) -> Self {
        Self::from_params(params, self.p(), self.q(), self.sigma2)
    }

    pub fn from_params(params: &[f64], p: usize, q: usize, sigma2: f64) -> Self {
        assert_eq!(params.len(), 1 + p + q, "parameter vector length");
        Self {
            d: params[0],
            ar: params[1..1 + p].to_vec(),
            ma: params[1 + p..].to_vec(),
            sigma2,
        }
    }

    /// Copy with trailing zero AR/MA coefficients removed.
    pub fn trimmed(&self) -> Self {
        let trim = |v: &[f64]| -> Vec<f64> {
            let k = v.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
            v[..k].to_vec()
        };
        Self { d: self.d, ar: trim(&self.ar), ma: trim(&self.ma), sigma2: self.sigma2 }
    }

    /// `Θ(1) / Φ(1)`.
    pub fn arma_gain_at_one(&self) -> f64 {
        let theta1: f64 = 1.0 + self.ma.iter().sum::<f64>();
        let phi1: f64 = 1.0 - self.ar.iter().sum::<f64>();
        theta1 / phi1
    }
}

/// An observed series. Values are fixed after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    mean: Option<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(ArfimaError::InsufficientData(format!("series needs at least 2 observations, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ArfimaError::Domain(format!("observation {i} is not finite")));
        }
        Ok(Self { values, mean: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored mean, if the series was built with [`TimeSeries::with_mean`].
    pub fn stored_mean(&self) -> Option<f64> {
        self.mean
    }

    /// Attaches a known process mean used instead of the sample mean.
    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    pub fn sample_mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.mean.unwrap_or_else(|| self.sample_mean())
    }

    pub fn demeaned(&self) -> Vec<f64> {
        let m = self.mean();
        self.values.iter().map(|v| v - m).collect()
    }

    /// Prefix `y_1..y_t` as a new series.
    pub fn head(&self, t: usize) -> Result<Self> {
        Self::new(self.values[..t.min(self.values.len())].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub d_ok: bool,
    pub ar_ok: bool,
    pub ma_ok: bool,
    pub ar_root_moduli: Vec<f64>,
    pub ma_root_moduli: Vec<f64>,
    /// Φ and Θ share a root (informational; does not affect `passes`).
    pub common_root: bool,
    /// Φ has a repeated root (rejected by the Sowell autocovariance).
    pub repeated_ar_root: bool,
}

impl StationarityReport {
    pub fn passes(&self) -> bool {
        self.d_ok && self.ar_ok && self.ma_ok
    }
}

pub fn check_parameters(model: &ArfimaModel) -> StationarityReport {
    let ar_roots = polynomial_roots(&model.ar_poly());
    let ma_roots = polynomial_roots(&model.ma_poly());
    let ar_root_moduli: Vec<f64> = ar_roots.iter().map(|z| z.norm()).collect();
    let ma_root_moduli: Vec<f64> = ma_roots.iter().map(|z| z.norm()).collect();
    let outside = |m: &[f64]| m.iter().all(|&r| r > 1.0);
    let common_root = ar_roots.iter().any(|a| ma_roots.iter().any(|b| roots_coincide(*a, *b)));
    let repeated_ar_root = has_repeated(&ar_roots);
    StationarityReport {
        d_ok: d_in_range(model.d),
        ar_ok: outside(&ar_root_moduli),
        ma_ok: outside(&ma_root_moduli),
        ar_root_moduli,
        ma_root_moduli,
        common_root,
        repeated_ar_root,
    }
}

pub(crate) fn has_repeated(roots: &[Complex64]) -> bool {
    roots.iter().enumerate().any(|(i, a)| roots[i + 1..].iter().any(|b| roots_coincide(*a, *b)))
}

/// Coefficients of `(1 - z)^{-d}` without the domain check.
pub(crate) fn frac_coefficients(d: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0);
    for j in 1..=m {
        let prev = out[j - 1];
        out.push((1.0 + (d - 1.0) / j as f64) * prev);
    }
    out
}

/// `η_0..η_m` of `(1 - z)^{-d} = Σ η_j z^j`, by the recursion
/// `η_j = (1 + (d - 1)/j) η_{j-1}`.
pub fn eta_coefficients(d: f64, m: usize) -> Result<Vec<f64>> {
    if !d_in_range(d) {
        return Err(ArfimaError::Domain(format!("d = {d} outside (-1, 0.5)")));
    }
    Ok(frac_coefficients(d, m))
}

/// Truncated Cauchy product of `a` and `b` (first `m + 1` terms).
pub(crate) fn convolve(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            let lo = j.saturating_sub(b.len().saturating_sub(1));
            (lo..=j.min(a.len().saturating_sub(1))).map(|i| a[i] * b[j - i]).sum()
        })
        .collect()
}

/// MA(∞) weights `ψ_0..ψ_m` of `(1 - z)^{-d} Θ(z) / Φ(z)`.
pub fn psi_coefficients(model: &ArfimaModel, m: usize) -> Result<Vec<f64>> {
    let report = check_parameters(model);
    if !(report.d_ok && report.ar_ok) {
        return Err(ArfimaError::NotStationary(describe(&report)));
    }
    let numer = convolve(&frac_coefficients(model.d, m), &model.ma_poly(), m);
    Ok(divide_by_ar(&numer, &model.ar))
}

/// `out = numer / Φ(z)` as a power series: `out_j = numer_j + Σ φ_i out_{j-i}`.
fn divide_by_ar(numer: &[f64], ar: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(numer.len());
    for j in 0..numer.len() {
        let mut v = numer[j];
        for (i, phi) in ar.iter().enumerate().take(j) {
            v += phi * out[j - i - 1];
        }
        out.push(v);
    }
    out
}

/// AR(∞) weights `π_0..π_m` of `Φ(z) (1 - z)^{d} / Θ(z)`.
pub fn pi_coefficients(model: &ArfimaModel, m: usize) -> Result<Vec<f64>> {
    let report = check_parameters(model);
    if !report.d_ok {
        return Err(ArfimaError::Domain(format!("d = {} outside (-1, 0.5)", model.d)));
    }
    if !report.ma_ok {
        return Err(ArfimaError::NotInvertible(describe(&report)));
    }
    let numer = convolve(&frac_coefficients(-model.d, m), &model.ar_poly(), m);
    let mut out: Vec<f64> = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut v = numer[j];
        for (i, theta) in model.ma.iter().enumerate().take(j) {
            v -= theta * out[j - i - 1];
        }
        out.push(v);
    }
    Ok(out)
}

fn describe(r: &StationarityReport) -> String {
    format!(
        "d_ok={}, ar_ok={} (root moduli {:?}), ma_ok={} (root moduli {:?})",
        r.d_ok, r.ar_ok, r.ar_root_moduli, r.ma_ok, r.ma_root_moduli
    )
}

pub(crate) fn require_valid(model: &ArfimaModel) -> Result<StationarityReport> {
    let r = check_parameters(model);
    if !r.d_ok {
        return Err(ArfimaError::Domain(format!("d = {} outside (-1, 0.5)", model.d)));
    }
    if !r.ar_ok {
        return Err(ArfimaError::NotStationary(describe(&r)));
    }
    if !r.ma_ok {
        return Err(ArfimaError::NotInvertible(describe(&r)));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma, ln_gamma_signed};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Γ(j+d) / (Γ(j+1) Γ(d)) through log-gamma.
    fn eta_oracle(d: f64, j: usize) -> f64 {
        let (a, sa) = ln_gamma_signed(j as f64 + d);
        let (b, _) = ln_gamma_signed(j as f64 + 1.0);
        let (c, sc) = ln_gamma_signed(d);
        sa * sc * (a - b - c).exp()
    }

    #[test]
    fn eta_small_cases() {
        assert_eq!(eta_coefficients(0.3, 0).unwrap(), vec![1.0]);
        let e = eta_coefficients(0.3, 1).unwrap();
        assert_relative_eq!(e[1], 0.3, max_relative = 1e-15);
        let e = eta_coefficients(0.4, 5).unwrap();
        for (j, v) in e.iter().enumerate() {
            assert_relative_eq!(*v, eta_oracle(0.4, j), max_relative = 1e-12);
        }
        assert!(eta_coefficients(0.5, 3).is_err());
        assert!(eta_coefficients(-1.0, 3).is_err());
    }

    #[test]
    fn eta_matches_gamma_ratio_up_to_1000() {
        for &d in &[-0.9, -0.3, 0.25, 0.45] {
            let e = eta_coefficients(d, 1000).unwrap();
            for (j, v) in e.iter().enumerate() {
                assert_relative_eq!(*v, eta_oracle(d, j), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn eta_power_law_tail() {
        let d = 0.3;
        let e = eta_coefficients(d, 10_000).unwrap();
        let ratio = e[10_000] * gamma(d) / (10_000f64).powf(d - 1.0);
        assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn psi_reductions() {
        let fnm = ArfimaModel::fractional_noise(0.2, 1.0).unwrap();
        assert_eq!(psi_coefficients(&fnm, 10).unwrap(), eta_coefficients(0.2, 10).unwrap());
        let ar1 = ArfimaModel::new(0.0, vec![0.5], vec![], 1.0).unwrap();
        let psi = psi_coefficients(&ar1, 3).unwrap();
        for (a, b) in psi.iter().zip([1.0, 0.5, 0.25, 0.125]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        let bad = ArfimaModel::new(0.1, vec![1.1], vec![], 1.0).unwrap();
        assert!(matches!(psi_coefficients(&bad, 3), Err(ArfimaError::NotStationary(_))));
    }

    #[test]
    fn psi_tail_matches_power_law() {
        let m = ArfimaModel::new(0.2, vec![0.5], vec![0.3], 1.0).unwrap();
        let psi = psi_coefficients(&m, 200).unwrap();
        let j = 200.0_f64;
        let asym = m.arma_gain_at_one() * j.powf(m.d - 1.0) / gamma(m.d);
        assert!((psi[200] / asym - 1.0).abs() < 0.05);
    }

    #[test]
    fn pi_cases() {
        let wn = ArfimaModel::fractional_noise(0.0, 1.0).unwrap();
        let p = pi_coefficients(&wn, 4).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let fnm = ArfimaModel::fractional_noise(0.3, 1.0).unwrap();
        let p = pi_coefficients(&fnm, 2).unwrap();
        // oracle: coefficients of (1-z)^{0.3}
        let oracle = frac_coefficients(-0.3, 2);
        for (a, b) in p.iter().zip(&oracle) {
            assert_relative_eq!(*a, *b, max_relative = 1e-15);
        }
        assert_relative_eq!(p[1], -0.3, max_relative = 1e-15);
        assert_relative_eq!(p[2], -0.105, max_relative = 1e-13);
        let noninv = ArfimaModel::new(0.1, vec![], vec![1.5], 1.0).unwrap();
        assert!(matches!(pi_coefficients(&noninv, 3), Err(ArfimaError::NotInvertible(_))));
    }

    #[test]
    fn pi_inverts_psi() {
        let m = ArfimaModel::new(0.2, vec![0.5], vec![0.3], 1.0).unwrap();
        let pi = pi_coefficients(&m, 30).unwrap();
        let psi = psi_coefficients(&m, 30).unwrap();
        let c = convolve(&pi, &psi, 30);
        assert!((c[0] - 1.0).abs() < 1e-10);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn check_parameters_cases() {
        let r = check_parameters(&ArfimaModel::fractional_noise(0.6, 1.0).unwrap());
        assert!(!r.d_ok && !r.passes());
        let r = check_parameters(&ArfimaModel::new(0.1, vec![1.1], vec![], 1.0).unwrap());
        assert!(!r.ar_ok);
        let r = check_parameters(&ArfimaModel::new(0.106, vec![0.397], vec![-0.285], 1.0).unwrap());
        assert!(r.d_ok && r.ar_ok && r.ma_ok && r.passes());
        assert!(!r.common_root);
        let r = check_parameters(&ArfimaModel::new(0.1, vec![0.5], vec![-0.5], 1.0).unwrap());
        assert!(r.common_root);
        let r = check_parameters(&ArfimaModel::new(0.1, vec![1.0, -0.25], vec![], 1.0).unwrap());
        assert!(r.repeated_ar_root && r.ar_ok);
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::new(vec![1.0]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        let s = TimeSeries::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(s.demeaned(), vec![-1.0, 1.0]);
        assert_eq!(s.clone().with_mean(0.0).demeaned(), vec![1.0, 3.0]);
    }

    fn valid_model() -> impl Strategy<Value = ArfimaModel> {
        (-0.95f64..0.45, proptest::collection::vec(-0.9f64..0.9, 0..3), proptest::collection::vec(-0.9f64..0.9, 0..3))
            .prop_filter_map("valid", |(d, ar, ma)| {
                let m = ArfimaModel::new(d, ar, ma, 1.0).ok()?;
                check_parameters(&m).passes().then_some(m)
            })
    }

    proptest! {
        #[test]
        fn pi_psi_identity(m in valid_model(), len in 1usize..100) {
            let pi = pi_coefficients(&m, len).unwrap();
            let psi = psi_coefficients(&m, len).unwrap();
            let c = convolve(&pi, &psi, len);
            prop_assert!((c[0] - 1.0).abs() < 1e-10);
            for v in &c[1..] { prop_assert!(v.abs() < 1e-10, "{}", v); }
        }

        #[test]
        fn valid_ar_roots_outside_disk(m in valid_model()) {
            for z in polynomial_roots(&m.ar_poly()) { prop_assert!(z.norm() > 1.0); }
        }
    }
}
