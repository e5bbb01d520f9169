//! Double-exponential quadrature for integrands with integrable endpoint
//! singularities.

use std::f64::consts::FRAC_PI_2;

const MAX_LEVEL: u32 = 12;
const T_MAX: f64 = 4.5;

/// Integrates `f` over `[a, b]` with the tanh-sinh rule, halving the step
/// until two successive levels agree to `rel_tol`.
///
/// The endpoints themselves are never evaluated, and abscissae where `f` is
/// not finite are dropped, so `1/sqrt` or logarithmic endpoint behaviour is
/// fine. Accuracy near such singularities is limited by how precisely the
/// integrand itself resolves points within a few ulps of the endpoint, which
/// for `1/sqrt` behaviour caps the relative error near `1e-8`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    if b < a {
        return -tanh_sinh(f, b, a, rel_tol);
    }
    let half = 0.5 * (b - a);

    let term = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // distance to the nearer endpoint, computed without cancellation
        let dist = 2.0 * half / (1.0 + (2.0 * u.abs()).exp());
        if dist <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - dist } else { a + dist };
        if x <= a || x >= b {
            return 0.0;
        }
        let fx = f(x);
        if fx.is_finite() {
            w * fx
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum += term(k * h) + term(-k * h);
        k += 1.0;
    }
    let mut estimate = half * h * sum;

    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            sum += term(t) + term(-t);
            t += 2.0 * h;
        }
        let next = half * h * sum;
        let converged = (next - estimate).abs() <= rel_tol * next.abs() || next == 0.0 && estimate == 0.0;
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

/// Integrates over consecutive intervals between sorted `breaks`, so kinks and
/// singularities sit at interval endpoints.
pub fn tanh_sinh_split<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| tanh_sinh(&f, w[0], w[1], rel_tol))
        .sum()
}
