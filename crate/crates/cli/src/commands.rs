//! Subcommand implementations. Each returns blocks of records for rendering.

use crate::io::{read_complete, read_series, Block};
use crate::{record, Command, Failure, InputArgs, ModelArgs};
use arfima::acvf::{acvf_hybrid, acvf_sowell, sample_mean_variance};
use arfima::asymp_cov::parameter_names;
use arfima::gw::{gw_test, Alternative, HacMethod};
use arfima::irf::{irf_asymptotic, irf_exact};
use arfima::model::check_parameters;
use arfima::simulate::{forecast, rolling_forecasts, simulate, ForecastModel, RefitPolicy};
use arfima::spectral::{periodogram, spectral_density_grid};
use arfima::whittle::{ljung_box, model_selection, sample_acf, whittle_fit};
use arfima::{ArfimaModel, TimeSeries};
use std::f64::consts::PI;
use std::path::Path;

pub struct Outcome {
    pub blocks: Vec<Block>,
    /// Reported after the output is written (exit code follows from it).
    pub warning: Option<Failure>,
}

impl From<Vec<Block>> for Outcome {
    fn from(blocks: Vec<Block>) -> Self {
        Self { blocks, warning: None }
    }
}

pub fn parse_fix(s: &str) -> Result<(usize, f64), String> {
    let (i, v) = s.split_once('=').ok_or_else(|| format!("expected INDEX=VALUE, got '{s}'"))?;
    let i = i.trim().parse::<usize>().map_err(|e| format!("bad index '{i}': {e}"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("bad value '{v}': {e}"))?;
    Ok((i, v))
}

fn model_of(m: &ModelArgs) -> Result<ArfimaModel, Failure> {
    Ok(ArfimaModel::new(m.d, m.ar.clone(), m.ma.clone(), m.sigma2)?)
}

fn series_of(input: &InputArgs) -> Result<TimeSeries, Failure> {
    Ok(TimeSeries::new(read_complete(&input.input, input.column.as_deref())?)?)
}

fn not_converged() -> Failure {
    Failure::Numerical("optimizer did not converge; estimates are from the last iterate".into(), "not_converged")
}

pub(crate) fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Fit { input, order, fix } => {
            let s = series_of(&input)?;
            let fit = whittle_fit(&s, order.p, order.q, &fix)?;
            let names = parameter_names(order.p, order.q);
            let (t, pv) = (fit.t_values(), fit.p_values());
            let coefs = fit
                .model
                .params()
                .iter()
                .enumerate()
                .map(|(i, est)| {
                    let fixed = fit.fixed_mask[i];
                    record! {
                        "parameter" => names[i],
                        "estimate" => est,
                        "se_hessian" => fit.stderr_hessian[i],
                        "se_exact" => fit.stderr_exact[i],
                        "t_value" => if fixed { f64::NAN } else { t[i] },
                        "p_value" => if fixed { f64::NAN } else { pv[i] },
                        "fixed" => fixed,
                    }
                })
                .collect();
            let summary = record! {
                "p" => order.p, "q" => order.q, "n" => fit.n,
                "sigma2" => fit.model.sigma2, "sigma" => fit.model.sigma2.sqrt(),
                "loglik" => fit.loglik, "aic" => fit.aic,
                "converged" => fit.converged, "iterations" => fit.iterations, "hessian_ok" => fit.hessian_ok,
            };
            let blocks = vec![Block::new("coefficients", coefs), Block::single("summary", summary)];
            Ok(Outcome { blocks, warning: (!fit.converged).then(not_converged) })
        }
        Command::Select { input, p_max, q_max } => {
            let s = series_of(&input)?;
            let rows = model_selection(&s, p_max, q_max)?
                .into_iter()
                .map(|r| {
                    record! {
                        "p" => r.p, "q" => r.q, "aic" => r.aic, "d" => r.d_hat,
                        "p_value_d" => r.p_value_d, "converged" => r.converged, "error" => r.error,
                    }
                })
                .collect();
            Ok(vec![Block::new("selection", rows)].into())
        }
        Command::Acvf { model, h_max, hybrid, switch_lag } => {
            let m = model_of(&model)?;
            let res = if hybrid { acvf_hybrid(&m, h_max, Some(switch_lag))? } else { acvf_sowell(&m, h_max)? };
            let acf = res.acf();
            let rows = (0..res.lags.len())
                .map(|i| {
                    record! {
                        "lag" => res.lags[i], "gamma" => res.gamma[i], "acf" => acf[i], "method" => res.method_per_lag[i],
                    }
                })
                .collect();
            Ok(vec![Block::new("acvf", rows)].into())
        }
        Command::Spectrum { model, input, column, points } => {
            let m = model_of(&model)?;
            let rows = match input {
                Some(path) => {
                    let s = TimeSeries::new(read_complete(&path, column.as_deref())?)?;
                    let pg = periodogram(&s);
                    let f = spectral_density_grid(&m, &pg.frequencies)?;
                    (0..pg.len())
                        .map(|j| record! {"lambda" => pg.frequencies[j], "periodogram" => pg.ordinates[j], "density" => f[j]})
                        .collect()
                }
                None => {
                    if points == 0 {
                        return Err(Failure::Usage("--points must be positive".into()));
                    }
                    let grid: Vec<f64> = (1..=points).map(|k| PI * k as f64 / points as f64).collect();
                    let f = spectral_density_grid(&m, &grid)?;
                    grid.iter().zip(f).map(|(l, v)| record! {"lambda" => l, "density" => v}).collect()
                }
            };
            Ok(vec![Block::new("spectrum", rows)].into())
        }
        Command::Irf { model, h_max } => {
            let m = model_of(&model)?;
            let exact = irf_exact(&m, h_max)?;
            let asym = if m.d != 0.0 && h_max > 0 { Some(irf_asymptotic(&m, h_max)?) } else { None };
            let rows = exact
                .iter()
                .enumerate()
                .map(|(j, e)| record! {"lag" => j, "exact" => e, "asymptotic" => asym.as_ref().map(|a| a[j])})
                .collect();
            Ok(vec![Block::new("irf", rows)].into())
        }
        Command::Simulate { model, n, seed } => {
            let m = model_of(&model)?;
            let s = simulate(&m, n, seed)?;
            let rows = s.values().iter().enumerate().map(|(t, v)| record! {"t" => t + 1, "value" => v}).collect();
            Ok(vec![Block::new("series", rows)].into())
        }
        Command::Forecast { input, order, ahead, t0, tau, count, fit_once } => {
            let s = series_of(&input)?;
            match t0 {
                None => {
                    let fit = whittle_fit(&s, order.p, order.q, &[])?;
                    let f = forecast(&fit.model, &s, ahead)?;
                    let rows = f
                        .iter()
                        .enumerate()
                        .map(|(k, v)| record! {"t" => s.len() + k + 1, "step" => k + 1, "value" => v})
                        .collect();
                    Ok(Outcome { blocks: vec![Block::new("forecast", rows)], warning: (!fit.converged).then(not_converged) })
                }
                Some(t0) => {
                    let policy = if fit_once { RefitPolicy::Once } else { RefitPolicy::EveryWindow };
                    let model = ForecastModel::Arfima { p: order.p, q: order.q };
                    let set = rolling_forecasts(&s, model, t0, tau, count, policy)?;
                    let bench = rolling_forecasts(&s, ForecastModel::RandomWalk, t0, tau, count, policy)?;
                    let rows = (0..set.len())
                        .map(|i| {
                            record! {
                                "t" => t0 + i + 1, "target" => set.target[i],
                                "prediction" => set.predictions[i], "benchmark" => bench.predictions[i],
                            }
                        })
                        .collect();
                    if set.missing() > 0 {
                        eprintln!("warning: {} of {} windows failed to fit; predictions left empty", set.missing(), set.len());
                    }
                    Ok(vec![Block::new("rolling", rows)].into())
                }
            }
        }
        Command::Gwtest { x, z, y, table, x_col, z_col, y_col, tau, method, alternative, bandwidth } => {
            let method: HacMethod = method.parse()?;
            let alternative: Alternative = alternative.parse()?;
            let (xs, zs, ys) = match table {
                Some(t) => (
                    read_series(&t, Some(&x_col))?,
                    read_series(&t, Some(&z_col))?,
                    read_series(&t, Some(&y_col))?,
                ),
                None => {
                    let get = |p: &Option<std::path::PathBuf>| read_series(p.as_deref().unwrap_or(Path::new("")), None);
                    (get(&x)?, get(&z)?, get(&y)?)
                }
            };
            if xs.len() != ys.len() || zs.len() != ys.len() {
                return Err(Failure::Usage(format!("lengths differ: x {}, z {}, y {}", xs.len(), zs.len(), ys.len())));
            }
            let keep: Vec<usize> = (0..ys.len()).filter(|&i| xs[i].is_some() && zs[i].is_some() && ys[i].is_some()).collect();
            let excluded = ys.len() - keep.len();
            if excluded > 0 {
                eprintln!("warning: {excluded} rows with missing values excluded");
            }
            let pick = |v: &[Option<f64>]| keep.iter().map(|&i| v[i].unwrap_or(f64::NAN)).collect::<Vec<_>>();
            let r = gw_test(&pick(&xs), &pick(&zs), &pick(&ys), tau, method, alternative, bandwidth)?;
            let row = record! {
                "statistic" => r.statistic, "p_value" => r.p_value, "tau" => r.tau, "n" => r.n,
                "method" => r.method.name(), "alternative" => r.alternative,
                "mean_loss_diff" => r.mean_loss_diff, "variance" => r.variance,
                "degenerate" => r.degenerate, "truncated" => r.truncated, "excluded" => excluded,
            };
            Ok(vec![Block::single("gwtest", row)].into())
        }
        Command::Diag { input, order, max_lag, alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Failure::Usage("--alpha must lie in (0, 1)".into()));
            }
            let s = series_of(&input)?;
            let fit = whittle_fit(&s, order.p, order.q, &[])?;
            let sd = fit.model.sigma2.sqrt();
            let n = fit.residuals.len();
            let resid = fit
                .residuals
                .iter()
                .enumerate()
                .map(|(t, e)| record! {"t" => t + 1, "standardized" => e / sd})
                .collect();
            let z = arfima::special::normal_quantile(1.0 - alpha / 2.0);
            let band = z / (n as f64).sqrt();
            let acf = sample_acf(&fit.residuals, max_lag)
                .iter()
                .enumerate()
                .map(|(k, r)| record! {"lag" => k + 1, "acf" => r, "lower" => -band, "upper" => band})
                .collect();
            let lb = ljung_box(&fit.residuals, max_lag)?
                .iter()
                .map(|r| record! {"lag" => r.lag, "statistic" => r.statistic, "p_value" => r.p_value, "reject" => r.p_value < alpha})
                .collect();
            let rep = check_parameters(&fit.model);
            let fmt = |v: &[f64]| v.iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>().join(";");
            let stat = record! {
                "d_ok" => rep.d_ok, "ar_ok" => rep.ar_ok, "ma_ok" => rep.ma_ok,
                "ar_root_moduli" => fmt(&rep.ar_root_moduli), "ma_root_moduli" => fmt(&rep.ma_root_moduli),
                "common_root" => rep.common_root, "passes" => rep.passes(),
            };
            let blocks = vec![
                Block::new("residuals", resid),
                Block::new("acf", acf),
                Block::new("ljung_box", lb),
                Block::single("stationarity", stat),
            ];
            Ok(Outcome { blocks, warning: (!fit.converged).then(not_converged) })
        }
        Command::Smv { model, n } => {
            let m = model_of(&model)?;
            let exact = sample_mean_variance(&m, n, true)?;
            let asym = if m.d != 0.0 { Some(sample_mean_variance(&m, n, false)?) } else { None };
            Ok(vec![Block::single("smv", record! {"n" => n, "exact" => exact, "asymptotic" => asym})].into())
        }
    }
}
