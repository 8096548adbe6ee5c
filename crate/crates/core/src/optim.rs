//! BFGS minimization with central-difference gradients and a backtracking
//! line search. Non-finite objective values act as a barrier.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-6, max_iter: 500, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

/// Central-difference gradient; falls back to a one-sided difference when
/// one side hits the barrier.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let dn = f(&xp);
            xp[i] = x[i];
            match (up.is_finite(), dn.is_finite()) {
                (true, true) => (up - dn) / (2.0 * h),
                (true, false) => (up - fx) / h,
                (false, true) => (fx - dn) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Minimizes `f` from `x0`. Converged when the gradient max-norm drops below
/// `grad_tol`; also stops (unconverged) after `max_iter` iterations or when
/// the line search cannot make progress.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if n == 0 || !fx.is_finite() {
        return Minimum { x: x0.to_vec(), value: fx, iterations: 0, converged: n == 0 && fx.is_finite(), grad_norm: 0.0 };
    }
    let mut g = DVector::from_vec(numeric_gradient(&f, x.as_slice(), fx, opts.fd_step));
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut stalls = 0;
    for iter in 0..opts.max_iter {
        let gn = max_abs(g.as_slice());
        if gn < opts.grad_tol {
            return Minimum { x: x.as_slice().to_vec(), value: fx, iterations: iter, converged: true, grad_norm: gn };
        }
        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        // keep the first trial step modest
        let dn = max_abs(dir.as_slice());
        let mut t = if dn > 1.0 { 1.0 / dn } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &dir * t;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if h_inv != DMatrix::identity(n, n) {
                h_inv = DMatrix::identity(n, n);
                stalls += 1;
                if stalls < 3 {
                    continue;
                }
            }
            return Minimum { x: x.as_slice().to_vec(), value: fx, iterations: iter, converged: false, grad_norm: gn };
        };
        let g_new = DVector::from_vec(numeric_gradient(&f, x_new.as_slice(), f_new, opts.fd_step));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            let b = &i - &y * s.transpose() * rho;
            h_inv = &a * &h_inv * &b + &s * s.transpose() * rho;
        }
        let progress = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        g = g_new;
        if progress == 0.0 {
            stalls += 1;
            if stalls > 5 {
                let gn = max_abs(g.as_slice());
                return Minimum { x: x.as_slice().to_vec(), value: fx, iterations: iter + 1, converged: gn < opts.grad_tol, grad_norm: gn };
            }
        }
    }
    let gn = max_abs(g.as_slice());
    Minimum { x: x.as_slice().to_vec(), value: fx, iterations: opts.max_iter, converged: gn < opts.grad_tol, grad_norm: gn }
}

/// Central-difference Hessian with steps `h_i = max(1e-4, 1e-4 |x_i|)`.
pub fn numeric_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| (1e-4 * v.abs()).max(1e-4)).collect();
    let f0 = f(x);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut xp = x.to_vec();
    let eval = |xp: &mut Vec<f64>, shifts: &[(usize, f64)]| {
        for &(i, s) in shifts {
            xp[i] += s;
        }
        let v = f(xp);
        for &(i, s) in shifts {
            xp[i] -= s;
        }
        v
    };
    for i in 0..n {
        let up = eval(&mut xp, &[(i, h[i])]);
        let dn = eval(&mut xp, &[(i, -h[i])]);
        m[(i, i)] = (up - 2.0 * f0 + dn) / (h[i] * h[i]);
        for j in 0..i {
            let pp = eval(&mut xp, &[(i, h[i]), (j, h[j])]);
            let pm = eval(&mut xp, &[(i, h[i]), (j, -h[j])]);
            let mp = eval(&mut xp, &[(i, -h[i]), (j, h[j])]);
            let mm = eval(&mut xp, &[(i, -h[i]), (j, -h[j])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], BfgsOptions { grad_tol: 1e-6, ..Default::default() });
        assert!(m.converged, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn barrier_respected() {
        // minimum of (x-2)^2 restricted to x < 1
        let f = |x: &[f64]| if x[0] >= 1.0 { f64::INFINITY } else { (x[0] - 2.0).powi(2) };
        let m = minimize(f, &[0.0], BfgsOptions::default());
        assert!(m.x[0] < 1.0 && m.x[0] > 0.99);
    }

    #[test]
    fn quadratic_hessian() {
        let v = [0.5, 2.0, 4.0];
        let f = |x: &[f64]| x.iter().zip(&v).map(|(a, b)| a * a / (2.0 * b)).sum::<f64>();
        let h = numeric_hessian(&f, &[0.1, -0.2, 0.3]);
        for i in 0..3 {
            assert!((h[(i, i)] - 1.0 / v[i]).abs() < 1e-6);
        }
        assert!(h[(0, 1)].abs() < 1e-6);
    }
}
