//! Exact Gaussian simulation, AR(∞) forecasting and the rolling-window
//! out-of-sample harness.

use crate::acvf::acvf_sowell;
use crate::error::{ArfimaError, Result};
use crate::model::{pi_coefficients, require_valid, ArfimaModel, TimeSeries};
use crate::par;
use crate::whittle::whittle_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Zero-mean Gaussian path of length `n` with autocovariance
/// `acvf_sowell(model, n - 1)`, built by the Durbin-Levinson recursion from a
/// ChaCha8 standard-normal stream seeded with `seed`.
pub fn simulate(model: &ArfimaModel, n: usize, seed: u64) -> Result<TimeSeries> {
    if n < 2 {
        return Err(ArfimaError::InsufficientData(format!("simulation length must be at least 2, got {n}")));
    }
    require_valid(model)?;
    let gamma = acvf_sowell(model, n - 1)?.gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    durbin_levinson_path(&gamma, &noise).map(TimeSeries::new)?
}

/// `y_t = Σ_{j=1}^{t} φ_{t,j} y_{t-j} + sqrt(v_t) e_t` with the partial
/// regression coefficients of `gamma`.
pub(crate) fn durbin_levinson_path(gamma: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    let n = noise.len();
    if gamma[0] <= 0.0 {
        return Err(ArfimaError::NotPositiveDefinite("γ(0) is not positive".into()));
    }
    let mut y = Vec::with_capacity(n);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    // gamma reversed so both inner products run forward
    let grev: Vec<f64> = gamma[1..n].iter().rev().copied().collect();
    let mut v = gamma[0];
    y.push(v.sqrt() * noise[0]);
    let mut yrev: Vec<f64> = vec![0.0; n];
    yrev[n - 1] = y[0];
    for t in 1..n {
        let acc = dot(&phi, &grev[n - t..]);
        let k = (gamma[t] - acc) / v;
        if !(k.abs() < 1.0) {
            return Err(ArfimaError::NotPositiveDefinite(format!("partial autocorrelation {k} at lag {t}")));
        }
        let m = phi.len();
        for j in 0..m / 2 {
            let (a, b) = (phi[j], phi[m - 1 - j]);
            phi[j] = a - k * b;
            phi[m - 1 - j] = b - k * a;
        }
        if m % 2 == 1 {
            phi[m / 2] *= 1.0 - k;
        }
        phi.push(k);
        v *= 1.0 - k * k;
        let mean = dot(&phi, &yrev[n - t..]);
        let next = mean + v.sqrt() * noise[t];
        y.push(next);
        if t < n - 1 {
            yrev[n - 1 - t] = next;
        }
    }
    Ok(y)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// `ŷ_{n+k} = ȳ + Σ_{j=1}^{n} (-π_j) ỹ_{n+k-j}` for `k = 1..ahead`, where
/// `ỹ` is the demeaned series extended by its own forecasts.
pub fn forecast(model: &ArfimaModel, series: &TimeSeries, ahead: usize) -> Result<Vec<f64>> {
    if ahead == 0 {
        return Err(ArfimaError::Domain("ahead must be at least 1".into()));
    }
    let n = series.len();
    let pi = pi_coefficients(model, n)?;
    let mean = series.mean();
    let mut y = series.demeaned();
    for _ in 0..ahead {
        let t = y.len();
        let next: f64 = (1..=n).map(|j| -pi[j] * y[t - j]).sum();
        y.push(next);
    }
    Ok(y[n..].iter().map(|v| v + mean).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ForecastModel {
    /// ARFIMA(p, d, q) fitted by Whittle.
    Arfima { p: usize, q: usize },
    /// Random walk: `ŷ_{t+τ} = y_t`.
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefitPolicy {
    EveryWindow,
    /// Fit once on `y_1..y_{t0-τ+1}` and reuse the estimate.
    Once,
}

/// Predictions for the held-out block `y_{t0+1}..y_{t0+count}`; target `s`
/// is predicted τ steps ahead from the window `y_1..y_{s-τ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub origin: usize,
    pub horizon: usize,
    /// `None` where the window's fit failed.
    pub predictions: Vec<Option<f64>>,
    pub target: Vec<f64>,
}

impl ForecastSet {
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn missing(&self) -> usize {
        self.predictions.iter().filter(|p| p.is_none()).count()
    }
}

/// Rolling τ-step forecasts of the last `count` observations after `t0`.
/// Requires `t0 + count <= n` and at least 20 observations in the first window.
pub fn rolling_forecasts(
    series: &TimeSeries,
    model: ForecastModel,
    t0: usize,
    tau: usize,
    count: usize,
    policy: RefitPolicy,
) -> Result<ForecastSet> {
    let y = series.values();
    let n = y.len();
    if tau == 0 {
        return Err(ArfimaError::Domain("tau must be at least 1".into()));
    }
    if t0 + count > n {
        return Err(ArfimaError::Domain(format!("t0 + count = {} exceeds series length {n}", t0 + count)));
    }
    if t0 < tau + 20 {
        return Err(ArfimaError::InsufficientData(format!("t0 = {t0} leaves too short a first window for tau = {tau}")));
    }
    let target: Vec<f64> = y[t0..t0 + count].to_vec();
    // window for target index s (0-based) is y[..s + 1 - tau]
    let window_end = |i: usize| t0 + i + 1 - tau;

    let predictions = match model {
        ForecastModel::RandomWalk => (0..count).map(|i| Some(y[window_end(i) - 1])).collect(),
        ForecastModel::Arfima { p, q } => {
            let predict = |fitted: &ArfimaModel, end: usize| -> Option<f64> {
                let w = TimeSeries::new(y[..end].to_vec()).ok()?;
                forecast(fitted, &w, tau).ok().map(|f| f[tau - 1]).filter(|v| v.is_finite())
            };
            let fit_on = |end: usize| -> Option<ArfimaModel> {
                let w = TimeSeries::new(y[..end].to_vec()).ok()?;
                whittle_fit(&w, p, q, &[]).ok().map(|f| f.model)
            };
            match policy {
                RefitPolicy::EveryWindow => par::map_range(count, |i| {
                    let end = window_end(i);
                    fit_on(end).and_then(|m| predict(&m, end))
                }),
                RefitPolicy::Once => match fit_on(window_end(0)) {
                    Some(m) => par::map_range(count, |i| predict(&m, window_end(i))),
                    None => vec![None; count],
                },
            }
        }
    };
    Ok(ForecastSet { origin: t0, horizon: tau, predictions, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acvf::acvf_fd_sequence;
    use crate::whittle::sample_acf;
    use approx::assert_relative_eq;

    #[test]
    fn white_noise_is_scaled_stream() {
        let m = ArfimaModel::fractional_noise(0.0, 4.0).unwrap();
        let s = simulate(&m, 50, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for v in s.values() {
            let e: f64 = rng.sample(StandardNormal);
            assert_relative_eq!(*v, 2.0 * e, max_relative = 1e-14);
        }
    }

    #[test]
    fn deterministic() {
        let m = ArfimaModel { d: 0.3, ar: vec![0.2], ma: vec![0.1], sigma2: 1.0 };
        assert_eq!(simulate(&m, 300, 1).unwrap(), simulate(&m, 300, 1).unwrap());
        assert_ne!(simulate(&m, 300, 1).unwrap(), simulate(&m, 300, 2).unwrap());
    }

    #[test]
    fn durbin_levinson_ar1_matches_recursion() {
        // AR(1) with unit innovation: y_t = φ y_{t-1} + e_t after the first draw
        let phi: f64 = 0.7;
        let g: Vec<f64> = (0..6).map(|h| phi.powi(h) / (1.0 - phi * phi)).collect();
        let e = [0.3, -1.0, 0.5, 2.0, -0.4, 0.1];
        let y = durbin_levinson_path(&g, &e).unwrap();
        assert_relative_eq!(y[0], e[0] * g[0].sqrt(), max_relative = 1e-14);
        for t in 1..6 {
            assert_relative_eq!(y[t], phi * y[t - 1] + e[t], max_relative = 1e-12);
        }
        assert!(durbin_levinson_path(&[1.0, 1.5], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn sample_variance_and_acf() {
        let m = ArfimaModel::fractional_noise(0.3, 1.0).unwrap();
        let n = 20_000;
        let g = acvf_fd_sequence(0.3, 1.0, 20).unwrap();
        // the long-memory path has a slowly converging variance; average a few
        let reps: Vec<(f64, Vec<f64>)> = par::map_range(8, |r| {
            let s = simulate(&m, n, 40 + r as u64).unwrap();
            let y = s.demeaned();
            (y.iter().map(|v| v * v).sum::<f64>() / n as f64, sample_acf(s.values(), 20))
        });
        let var = reps.iter().map(|r| r.0).sum::<f64>() / 8.0;
        assert!((var / g[0] - 1.0).abs() < 0.1, "{var} vs {}", g[0]);
        let r1 = reps.iter().map(|r| r.1[0]).sum::<f64>() / 8.0;
        assert!((r1 - g[1] / g[0]).abs() < 0.03);
    }

    #[test]
    fn forecast_white_noise_and_ar1() {
        let s = TimeSeries::new(vec![1.0, 4.0, 2.0, 3.0, 5.0]).unwrap();
        let wn = ArfimaModel::fractional_noise(0.0, 1.0).unwrap();
        for f in forecast(&wn, &s, 3).unwrap() {
            assert_relative_eq!(f, 3.0, epsilon = 1e-14);
        }
        let ar = ArfimaModel { d: 0.0, ar: vec![0.5], ma: vec![], sigma2: 1.0 };
        let f = forecast(&ar, &s, 3).unwrap();
        for (k, v) in f.iter().enumerate() {
            assert_relative_eq!(v - 3.0, 0.5f64.powi(k as i32 + 1) * 2.0, epsilon = 1e-14);
        }
        assert!(forecast(&ar, &s, 0).is_err());
    }

    #[test]
    fn one_step_mse_near_innovation_variance() {
        let m = ArfimaModel::fractional_noise(0.3, 1.0).unwrap();
        let s = simulate(&m, 2000, 17).unwrap();
        let y = s.values();
        let err: Vec<f64> = par::map_range(1000, |i| {
            let end = 1000 + i;
            let w = TimeSeries::new(y[..end].to_vec()).unwrap().with_mean(0.0);
            forecast(&m, &w, 1).unwrap()[0] - y[end]
        });
        let mse = err.iter().map(|e| e * e).sum::<f64>() / 1000.0;
        assert!((mse - 1.0).abs() < 0.1, "{mse}");
    }

    #[test]
    fn rolling_benchmark_and_schedule() {
        let y: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = TimeSeries::new(y.clone()).unwrap();
        let set = rolling_forecasts(&s, ForecastModel::RandomWalk, 50, 2, 10, RefitPolicy::Once).unwrap();
        assert_eq!(set.target, y[50..60].to_vec());
        for (i, p) in set.predictions.iter().enumerate() {
            assert_eq!(p.unwrap(), y[50 + i - 2]);
        }
        let empty = rolling_forecasts(&s, ForecastModel::RandomWalk, 50, 2, 0, RefitPolicy::Once).unwrap();
        assert!(empty.is_empty());
        assert!(rolling_forecasts(&s, ForecastModel::RandomWalk, 55, 2, 10, RefitPolicy::Once).is_err());
    }

    #[test]
    fn refit_policies_agree_in_shape() {
        let m = ArfimaModel::fractional_noise(0.3, 1.0).unwrap();
        let s = simulate(&m, 400, 3).unwrap();
        let a = rolling_forecasts(&s, ForecastModel::Arfima { p: 0, q: 0 }, 380, 1, 20, RefitPolicy::EveryWindow).unwrap();
        let b = rolling_forecasts(&s, ForecastModel::Arfima { p: 0, q: 0 }, 380, 1, 20, RefitPolicy::Once).unwrap();
        assert_eq!(a.missing(), 0);
        assert_eq!(b.missing(), 0);
        for (x, y) in a.predictions.iter().zip(&b.predictions) {
            assert!((x.unwrap() - y.unwrap()).abs() < 0.5);
        }
        assert_eq!(a, rolling_forecasts(&s, ForecastModel::Arfima { p: 0, q: 0 }, 380, 1, 20, RefitPolicy::EveryWindow).unwrap());
    }

    #[test]
    fn fitted_model_beats_random_walk() {
        let m = ArfimaModel::fractional_noise(0.3, 1.0).unwrap();
        let wins: usize = par::map_range(50, |r| {
            let s = simulate(&m, 1000, 700 + r as u64).unwrap();
            let train = TimeSeries::new(s.values()[..900].to_vec()).unwrap();
            let fit = whittle_fit(&train, 0, 0, &[]).unwrap().model;
            let y = s.values();
            let (mut a, mut b) = (0.0, 0.0);
            for end in 900..1000 {
                let w = TimeSeries::new(y[..end].to_vec()).unwrap();
                a += (forecast(&fit, &w, 1).unwrap()[0] - y[end]).powi(2);
                b += (y[end - 1] - y[end]).powi(2);
            }
            usize::from(a < b)
        })
        .into_iter()
        .sum();
        assert!(wins >= 45, "{wins}");
    }
}
