//! Giacomini-White test of equal predictive ability under absolute-error
//! loss, with HAC long-run variance estimators.

use crate::error::{ArfimaError, Result};
use crate::special::{normal_cdf, normal_sf};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Quadratic-spectral automatic bandwidth constant.
pub const QS_BANDWIDTH_CONSTANT: f64 = 1.3221;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HacMethod {
    /// Sample variance (intercept-only regression); no autocorrelation terms.
    SimpleRegression,
    /// Bartlett kernel with a user bandwidth, defaulting to the Newey-West rule.
    Hac,
    /// Bartlett kernel with `L = ⌊4 (N/100)^{2/9}⌋`.
    NeweyWest,
    /// Quadratic-spectral kernel with AR(1) plug-in bandwidth.
    AndrewsKernel,
    /// Reserved; not implemented.
    LumleyHeagerty,
}

impl HacMethod {
    pub const ALL: [HacMethod; 5] =
        [Self::SimpleRegression, Self::Hac, Self::NeweyWest, Self::AndrewsKernel, Self::LumleyHeagerty];

    pub fn name(self) -> &'static str {
        match self {
            Self::SimpleRegression => "simple_regression",
            Self::Hac => "hac",
            Self::NeweyWest => "newey_west",
            Self::AndrewsKernel => "andrews_kernel",
            Self::LumleyHeagerty => "lumley_heagerty",
        }
    }
}

impl fmt::Display for HacMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HacMethod {
    type Err = ArfimaError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ArfimaError::Domain(format!("unknown variance method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    Greater,
    Less,
}

impl FromStr for Alternative {
    type Err = ArfimaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_sided" | "two-sided" => Ok(Self::TwoSided),
            "greater" => Ok(Self::Greater),
            "less" => Ok(Self::Less),
            _ => Err(ArfimaError::Domain(format!("unknown alternative '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HacEstimate {
    pub value: f64,
    /// Bandwidth actually used (lags for Bartlett, `S_N` for QS).
    pub bandwidth: f64,
    /// A negative estimate was replaced by the lag-0 variance.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwReport {
    pub statistic: f64,
    pub p_value: f64,
    pub tau: usize,
    pub n: usize,
    pub method: HacMethod,
    pub alternative: Alternative,
    pub mean_loss_diff: f64,
    pub variance: f64,
    /// Zero long-run variance with a nonzero mean difference.
    pub degenerate: bool,
    pub truncated: bool,
}

/// `ΔL_i = |x_i - y_i| - |z_i - y_i|`.
pub fn loss_differential(x: &[f64], z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(ArfimaError::LengthMismatch { expected: y.len(), got: x.len() });
    }
    if z.len() != y.len() {
        return Err(ArfimaError::LengthMismatch { expected: y.len(), got: z.len() });
    }
    if y.len() < 2 {
        return Err(ArfimaError::InsufficientData("need at least 2 forecasts".into()));
    }
    Ok(x.iter().zip(z).zip(y).map(|((a, b), t)| (a - t).abs() - (b - t).abs()).collect())
}

pub fn newey_west_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// `γ̂_j = (1/N) Σ_t u_t u_{t+j}` of the demeaned sequence for `j = 0..=max`.
fn autocovariances(u: &[f64], max: usize) -> Vec<f64> {
    let n = u.len();
    let mean = u.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = u.iter().map(|v| v - mean).collect();
    (0..=max.min(n - 1)).map(|j| c[..n - j].iter().zip(&c[j..]).map(|(a, b)| a * b).sum::<f64>() / n as f64).collect()
}

fn quadratic_spectral(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let a = 6.0 * PI * x / 5.0;
    25.0 / (12.0 * PI * PI * x * x) * (a.sin() / a - a.cos())
}

/// `S_N = 1.3221 (α̂(2) N)^{1/5}` with `α̂(2) = 4ρ̂² / (1 - ρ̂)^4` from an
/// AR(1) fit to `u`.
pub fn andrews_bandwidth(u: &[f64]) -> f64 {
    let g = autocovariances(u, 1);
    let rho = if g[0] > 0.0 { (g[1] / g[0]).clamp(-0.97, 0.97) } else { 0.0 };
    let alpha = 4.0 * rho * rho / (1.0 - rho).powi(4);
    QS_BANDWIDTH_CONSTANT * (alpha * u.len() as f64).powf(0.2)
}

/// Long-run variance of `u`. `bandwidth` overrides the automatic choice for
/// the Bartlett methods (in lags) and the QS method (as `S_N`).
pub fn hac_variance(u: &[f64], method: HacMethod, bandwidth: Option<usize>) -> Result<HacEstimate> {
    let n = u.len();
    if n < 4 {
        return Err(ArfimaError::InsufficientData(format!("long-run variance needs at least 4 values, got {n}")));
    }
    if bandwidth == Some(0) && matches!(method, HacMethod::AndrewsKernel) {
        // zero QS bandwidth degenerates to the lag-0 term
        let g = autocovariances(u, 0);
        return Ok(HacEstimate { value: g[0], bandwidth: 0.0, truncated: false });
    }
    let (value, bw) = match method {
        HacMethod::LumleyHeagerty => {
            return Err(ArfimaError::NotImplemented("the Lumley-Heagerty weighted empirical estimator is not available".into()))
        }
        HacMethod::SimpleRegression => (autocovariances(u, 0)[0], 0.0),
        HacMethod::Hac | HacMethod::NeweyWest => {
            let lags = bandwidth.unwrap_or_else(|| newey_west_lags(n)).min(n - 1);
            let g = autocovariances(u, lags);
            let w = |j: usize| 1.0 - j as f64 / (lags as f64 + 1.0);
            (g[0] + 2.0 * (1..=lags).map(|j| w(j) * g[j]).sum::<f64>(), lags as f64)
        }
        HacMethod::AndrewsKernel => {
            let s = bandwidth.map_or_else(|| andrews_bandwidth(u), |b| b as f64);
            let g = autocovariances(u, n - 1);
            let tail: f64 = if s > 0.0 { (1..n).map(|j| quadratic_spectral(j as f64 / s) * g[j]).sum() } else { 0.0 };
            (g[0] + 2.0 * tail, s)
        }
    };
    if value < 0.0 {
        let g0 = autocovariances(u, 0)[0];
        return Ok(HacEstimate { value: g0, bandwidth: bw, truncated: true });
    }
    Ok(HacEstimate { value, bandwidth: bw, truncated: false })
}

/// `t = mean(ΔL) / sqrt(σ̂²_N / N)`, standard normal under equal predictive
/// ability. For τ = 1 `σ̂²_N` is the sample variance; for τ > 1 it is the
/// long-run variance from `method`.
pub fn gw_test(
    x: &[f64],
    z: &[f64],
    y: &[f64],
    tau: usize,
    method: HacMethod,
    alternative: Alternative,
    bandwidth: Option<usize>,
) -> Result<GwReport> {
    if tau == 0 {
        return Err(ArfimaError::Domain("tau must be at least 1".into()));
    }
    let dl = loss_differential(x, z, y)?;
    let n = dl.len();
    if n < 4 {
        return Err(ArfimaError::InsufficientData(format!("need at least 4 forecasts, got {n}")));
    }
    let mean = dl.iter().sum::<f64>() / n as f64;
    let est = if tau == 1 {
        if method == HacMethod::LumleyHeagerty {
            hac_variance(&dl, method, bandwidth)?;
        }
        hac_variance(&dl, HacMethod::SimpleRegression, None)?
    } else {
        hac_variance(&dl, method, bandwidth)?
    };
    let scale = 1e-14 * dl.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (statistic, degenerate) = if est.value > 0.0 {
        (mean / (est.value / n as f64).sqrt(), false)
    } else if mean.abs() <= scale {
        (0.0, false)
    } else {
        (mean.signum() * f64::INFINITY, true)
    };
    let p_value = match alternative {
        Alternative::TwoSided => (2.0 * normal_sf(statistic.abs())).min(1.0),
        Alternative::Greater => normal_sf(statistic),
        Alternative::Less => normal_cdf(statistic),
    };
    Ok(GwReport {
        statistic,
        p_value,
        tau,
        n,
        method,
        alternative,
        mean_loss_diff: mean,
        variance: est.value,
        degenerate,
        truncated: est.truncated,
    })
}
