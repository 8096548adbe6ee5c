//! Impulse responses `R_j = Σ_{i≤j} ψ_i η_{j-i}` of `(1 - B)^{-d} y_t` to the
//! innovations, and the power-law approximation `R_j ~ j^{d-1} S / Γ(d)`.

use crate::error::{ArfimaError, Result};
use crate::model::{convolve, eta_coefficients, psi_coefficients, require_valid, ArfimaModel};
use crate::special::gamma;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfResult {
    pub lags: Vec<usize>,
    pub exact: Vec<f64>,
    pub asymptotic: Vec<f64>,
}

/// `R_0..R_h` by Cauchy product of the ψ and η weights.
pub fn irf_exact(model: &ArfimaModel, h: usize) -> Result<Vec<f64>> {
    require_valid(model)?;
    let psi = psi_coefficients(model, h)?;
    let eta = eta_coefficients(model.d, h)?;
    Ok(convolve(&psi, &eta, h))
}

/// `R_j ≈ j^{d-1} S / Γ(d)` for `j = 1..h`, with `S = Θ(1)/Φ(1)` standing in
/// for `Σ ψ_i`; lag 0 carries the exact value 1.
///
/// The approximation presumes summable ψ weights. For `d > 0` the exact
/// response decays like `j^{2d-1}`, so the two curves separate as `j` grows.
pub fn irf_asymptotic(model: &ArfimaModel, h: usize) -> Result<Vec<f64>> {
    require_valid(model)?;
    if model.d == 0.0 {
        return Err(ArfimaError::Domain("asymptotic IRF is undefined for d = 0 (Γ(0) pole)".into()));
    }
    if h == 0 {
        return Err(ArfimaError::Domain("asymptotic IRF needs h >= 1".into()));
    }
    let scale = model.arma_gain_at_one() / gamma(model.d);
    let mut out = Vec::with_capacity(h + 1);
    out.push(1.0);
    out.extend((1..=h).map(|j| (j as f64).powf(model.d - 1.0) * scale));
    Ok(out)
}

pub fn irf(model: &ArfimaModel, h: usize) -> Result<IrfResult> {
    Ok(IrfResult { lags: (0..=h).collect(), exact: irf_exact(model, h)?, asymptotic: irf_asymptotic(model, h)? })
}
