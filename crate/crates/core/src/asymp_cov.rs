//! Exact asymptotic information matrix of the Whittle/ML estimator of
//! `(d, φ, θ)`, obtained by quadrature of outer products of log-spectrum
//! gradients.

use crate::error::{ArfimaError, Result};
use crate::model::{check_parameters, ArfimaModel};
use crate::par;
use crate::quad::{integrate, QuadOptions};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-entry absolute quadrature tolerance.
pub const FISHER_ABS_TOL: f64 = 1e-11;

/// Root moduli closer than this to the unit circle are treated as boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    /// Information matrix, row-major, `(1+p+q)²`.
    pub info: Vec<Vec<f64>>,
    /// Its inverse.
    pub cov: Vec<Vec<f64>>,
    /// Parameter names in row order: `d`, `phi1..`, `theta1..`.
    pub order: Vec<String>,
}

pub fn parameter_names(p: usize, q: usize) -> Vec<String> {
    std::iter::once("d".to_string())
        .chain((1..=p).map(|i| format!("phi{i}")))
        .chain((1..=q).map(|i| format!("theta{i}")))
        .collect()
}

/// `∂/∂c_ℓ log|P(e^{iλ})|²` for `P(z) = Σ_{j≥0} a_j z^j`, where the free
/// coefficient enters as `a_ℓ = sign · c_ℓ`: `2 sign Σ_j a_j cos((ℓ-j)λ) / |P|²`.
fn log_modulus_gradient(poly: &[f64], sign: f64, lambda: f64, out: &mut Vec<f64>) {
    let sq = crate::spectral::poly_sq_modulus(poly, lambda);
    for l in 1..poly.len() {
        let num: f64 = poly.iter().enumerate().map(|(j, a)| a * ((l as f64 - j as f64) * lambda).cos()).sum();
        out.push(2.0 * sign * num / sq);
    }
}

/// `∇ log f(λ)` with respect to `(d, φ_1..φ_p, θ_1..θ_q)`.
///
/// The `d` component is `-log[2(1 - cos λ)]`, written as `-2 log(2 sin(λ/2))`
/// to keep precision near zero. The ARMA components include the constant
/// terms `Φ_0 = Θ_0 = 1`.
pub fn grad_log_spectrum(model: &ArfimaModel, lambda: f64) -> Result<Vec<f64>> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(ArfimaError::Domain("log-spectrum gradient is singular at λ = 0".into()));
    }
    Ok(grad_unchecked(&model.ar_poly(), &model.ma_poly(), lambda))
}

fn grad_unchecked(ar_poly: &[f64], ma_poly: &[f64], lambda: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(ar_poly.len() + ma_poly.len() - 1);
    g.push(-2.0 * (2.0 * (0.5 * lambda.abs()).sin()).ln());
    // Φ contributes -log|Φ|², with a_ℓ = -φ_ℓ: two sign flips cancel
    log_modulus_gradient(ar_poly, 1.0, lambda, &mut g);
    log_modulus_gradient(ma_poly, 1.0, lambda, &mut g);
    g
}

/// Information matrix `Σ = (1/2π) ∫_0^π ∇log f ∇log fᵀ dλ` and its inverse.
pub fn fisher_matrix(model: &ArfimaModel) -> Result<CovarianceMatrix> {
    fisher_matrix_with_tol(model, FISHER_ABS_TOL)
}

pub fn fisher_matrix_with_tol(model: &ArfimaModel, abs_tol: f64) -> Result<CovarianceMatrix> {
    let report = check_parameters(model);
    let names = parameter_names(model.p(), model.q());
    if !report.passes() {
        return Err(ArfimaError::NotStationary(format!("{report:?}")));
    }
    if let Some(i) = report.ar_root_moduli.iter().position(|&r| r < 1.0 + BOUNDARY_MARGIN) {
        return Err(ArfimaError::NotPositiveDefinite(format!(
            "AR root {i} has modulus {} within {BOUNDARY_MARGIN} of the unit circle",
            report.ar_root_moduli[i]
        )));
    }
    if let Some(i) = report.ma_root_moduli.iter().position(|&r| r < 1.0 + BOUNDARY_MARGIN) {
        return Err(ArfimaError::NotPositiveDefinite(format!(
            "MA root {i} has modulus {} within {BOUNDARY_MARGIN} of the unit circle",
            report.ma_root_moduli[i]
        )));
    }
    if report.common_root {
        return Err(ArfimaError::NotPositiveDefinite("AR and MA polynomials share a root; information is singular".into()));
    }

    let k = model.n_params();
    let (ar, ma) = (model.ar_poly(), model.ma_poly());
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let opts = QuadOptions { abs_tol, rel_tol: 0.0, max_intervals: 10_000 };
    let values = par::map_slice(&pairs, |&(i, j)| {
        let q = integrate(
            |l| {
                let g = grad_unchecked(&ar, &ma, l);
                g[i] * g[j]
            },
            0.0,
            PI,
            opts,
        );
        q.value / (2.0 * PI)
    });
    let mut info = DMatrix::<f64>::zeros(k, k);
    for (&(i, j), v) in pairs.iter().zip(values) {
        info[(i, j)] = v;
        info[(j, i)] = v;
    }
    let chol = info.clone().cholesky().ok_or_else(|| {
        let worst = (0..k).min_by(|&a, &b| info[(a, a)].total_cmp(&info[(b, b)])).unwrap_or(0);
        ArfimaError::NotPositiveDefinite(format!("information matrix is singular near parameter {}", names[worst]))
    })?;
    let cov = chol.inverse();
    let rows = |m: &DMatrix<f64>| (0..k).map(|i| (0..k).map(|j| m[(i, j)]).collect()).collect();
    Ok(CovarianceMatrix { info: rows(&info), cov: rows(&cov), order: names })
}

/// `SE_i = sqrt([Σ^{-1}]_ii / n)`.
pub fn exact_stderr(model: &ArfimaModel, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(ArfimaError::InsufficientData("n must be positive".into()));
    }
    let c = fisher_matrix(model)?;
    Ok((0..c.cov.len()).map(|i| (c.cov[i][i] / n as f64).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_density;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn d_component_values() {
        let m = ArfimaModel::fractional_noise(0.2, 1.0).unwrap();
        assert_relative_eq!(grad_log_spectrum(&m, PI).unwrap()[0], -(4f64.ln()), max_relative = 1e-14);
        assert_relative_eq!(grad_log_spectrum(&m, 2.0 * PI / 3.0).unwrap()[0], -(3f64.ln()), max_relative = 1e-14);
        assert!(grad_log_spectrum(&m, 0.0).is_err());
    }

    fn fd_gradient(m: &ArfimaModel, lambda: f64) -> Vec<f64> {
        let h = 1e-6;
        let base = m.params();
        (0..base.len())
            .map(|i| {
                let mut up = base.clone();
                let mut dn = base.clone();
                up[i] += h;
                dn[i] -= h;
                let fu = spectral_density(&m.with_params(&up), lambda).unwrap().ln();
                let fdn = spectral_density(&m.with_params(&dn), lambda).unwrap().ln();
                (fu - fdn) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = ArfimaModel::new(0.2, vec![0.5], vec![0.3], 1.0).unwrap();
        for lambda in [0.1, 0.7, 1.5, 3.0] {
            let g = grad_log_spectrum(&m, lambda).unwrap();
            for (a, b) in g.iter().zip(fd_gradient(&m, lambda)) {
                assert!((a - b).abs() < 1e-5, "λ={lambda}: {a} vs {b}");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = ArfimaModel::new(-0.3, vec![0.4, -0.3], vec![0.2, 0.1], 2.0).unwrap();
        for _ in 0..10 {
            let lambda = rng.random_range(0.01..PI);
            let g = grad_log_spectrum(&m, lambda).unwrap();
            for (a, b) in g.iter().zip(fd_gradient(&m, lambda)) {
                assert!((a - b).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn fn_information_is_pi_squared_over_six() {
        for d in [0.1, 0.4] {
            let c = fisher_matrix(&ArfimaModel::fractional_noise(d, 1.0).unwrap()).unwrap();
            assert!((c.info[0][0] - PI * PI / 6.0).abs() < 1e-8);
        }
    }

    #[test]
    fn ar1_matrix_symmetric() {
        let c = fisher_matrix(&ArfimaModel::new(0.146, vec![0.072], vec![], 1.0).unwrap()).unwrap();
        assert!((c.info[0][1] - c.info[1][0]).abs() < 1e-12);
        assert!(c.info[0][1].is_finite());
        // cov · info = I
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| c.cov[i][k] * c.info[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn stderr_scaling() {
        let m = ArfimaModel::fractional_noise(0.2, 1.0).unwrap();
        let se = exact_stderr(&m, 1164).unwrap();
        assert!((se[0] - 6f64.sqrt() / (PI * 1164f64.sqrt())).abs() < 1e-9);
        assert!((se[0] - 0.0229).abs() < 0.0005);
        let se4 = exact_stderr(&m, 4 * 1164).unwrap();
        assert_relative_eq!(se4[0], se[0] / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn boundary_and_common_roots_rejected() {
        let near = ArfimaModel::new(0.1, vec![0.9995], vec![], 1.0).unwrap();
        assert!(fisher_matrix(&near).is_err());
        let common = ArfimaModel::new(0.1, vec![0.5], vec![-0.5], 1.0).unwrap();
        assert!(matches!(fisher_matrix(&common), Err(ArfimaError::NotPositiveDefinite(_))));
    }
}
