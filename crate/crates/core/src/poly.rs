//! Polynomial roots via companion-matrix eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluates `c[0] + c[1] z + ... + c[n] z^n` and its derivative (Horner).
pub fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All complex roots of the polynomial with ascending coefficients
/// `coeffs[0] + coeffs[1] z + ...`.
///
/// Trailing zero coefficients are dropped; a constant polynomial has no roots.
/// Each eigenvalue of the companion matrix is polished with Newton steps.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(k) if k > 0 => k,
        _ => return Vec::new(),
    };
    let coeffs = &coeffs[..=deg];
    let lead = coeffs[deg];

    let mut roots: Vec<Complex64> = if deg == 1 {
        vec![Complex64::new(-coeffs[0] / lead, 0.0)]
    } else {
        let mut companion = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -coeffs[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    };

    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (p, dp) = eval_with_derivative(coeffs, *r);
            if p.norm() <= 1e-14 * scale || dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let candidate = *r - step;
            if eval(coeffs, candidate).norm() < p.norm() {
                *r = candidate;
            } else {
                break;
            }
        }
        // conjugate-symmetric input: clean spurious imaginary noise on real roots
        if r.im.abs() < 1e-12 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.im.total_cmp(&b.im)));
    roots
}

/// Two roots are treated as the same point when their distance is below
/// `1e-8 * max(1, |a|)`.
pub fn roots_coincide(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-8 * a.norm().max(1.0)
}
