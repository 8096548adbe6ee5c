use arfima::acvf::{acvf_hybrid, acvf_sowell, AcvfMethod};
use arfima::asymp_cov::exact_stderr;
use arfima::gw::{gw_test, Alternative, HacMethod};
use arfima::irf::irf;
use arfima::model::check_parameters;
use arfima::simulate::{forecast, rolling_forecasts, simulate, ForecastModel, RefitPolicy};
use arfima::whittle::{ljung_box, model_selection, whittle_fit};
use arfima::{ArfimaModel, TimeSeries};

#[test]
fn simulate_fit_diagnose_forecast() {
    let truth = ArfimaModel::new(0.2, vec![0.4], vec![-0.3], 2.0).unwrap();
    let s = simulate(&truth, 3000, 99).unwrap();
    let fit = whittle_fit(&s, 1, 1, &[]).unwrap();
    assert!(fit.converged && fit.hessian_ok);
    assert!(check_parameters(&fit.model).passes());
    for (est, (want, se)) in fit.model.params().iter().zip(truth.params().iter().zip(&fit.stderr_exact)) {
        assert!((est - want).abs() < 4.0 * se, "{est} vs {want} (se {se})");
    }
    let lb = ljung_box(&fit.residuals, 20).unwrap();
    assert!(lb[19].p_value > 0.01);
    let exact = exact_stderr(&fit.model, 3000).unwrap();
    for (h, e) in fit.stderr_hessian.iter().zip(&exact) {
        assert!(h / e > 1.0 / 3.0 && h / e < 3.0);
    }
    let f = forecast(&fit.model, &s, 10).unwrap();
    assert!(f.len() == 10 && f.iter().all(|v| v.is_finite()));
}

#[test]
fn rolling_exercise_feeds_gw_test() {
    let truth = ArfimaModel::fractional_noise(0.35, 1.0).unwrap();
    let s = simulate(&truth, 600, 5).unwrap();
    for tau in [1, 3] {
        let m = rolling_forecasts(&s, ForecastModel::Arfima { p: 0, q: 0 }, 560, tau, 40, RefitPolicy::EveryWindow).unwrap();
        let b = rolling_forecasts(&s, ForecastModel::RandomWalk, 560, tau, 40, RefitPolicy::Once).unwrap();
        assert_eq!(m.missing(), 0);
        let x: Vec<f64> = m.predictions.iter().map(|p| p.unwrap()).collect();
        let z: Vec<f64> = b.predictions.iter().map(|p| p.unwrap()).collect();
        let r = gw_test(&x, &z, &m.target, tau, HacMethod::NeweyWest, Alternative::TwoSided, None).unwrap();
        assert_eq!(r.n, 40);
        assert!((0.0..=1.0).contains(&r.p_value));
    }
}

#[test]
fn hybrid_and_exact_agree_before_switch() {
    let m = ArfimaModel::new(0.3, vec![0.5], vec![0.2], 1.0).unwrap();
    let exact = acvf_sowell(&m, 200).unwrap();
    let hybrid = acvf_hybrid(&m, 200, None).unwrap();
    assert_eq!(exact.gamma[..=50], hybrid.gamma[..=50]);
    assert!(hybrid.method_per_lag[51..].iter().all(|&k| k == AcvfMethod::Asymptotic));
    // tail approximation is already close at lag 200
    assert!((hybrid.gamma[200] / exact.gamma[200] - 1.0).abs() < 0.05);
    let r = irf(&m, 50).unwrap();
    assert_eq!(r.exact.len(), 51);
}

#[test]
fn selection_recovers_short_memory_order() {
    let truth = ArfimaModel::new(0.0, vec![0.6], vec![], 1.0).unwrap();
    let s = TimeSeries::new(simulate(&truth, 2000, 8).unwrap().values().to_vec()).unwrap();
    let rows = model_selection(&s, 1, 1).unwrap();
    assert!(rows.iter().all(|r| r.error.is_none()));
    let best = &rows[0];
    assert!(best.p == 1 || best.d_hat > 0.2, "{rows:?}");
}
