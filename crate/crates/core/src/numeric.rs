//! Small numerical kernels shared by the modules: compensated summation,
//! log-sum-exp and double-exponential quadrature.

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            comp += (total - t) + v;
        } else {
            comp += (v - t) + total;
        }
        total = t;
    }
    total + comp
}

/// `log Σ exp(x_i)`, ignoring `-inf` entries. Returns `-inf` when every
/// entry is `-inf` (or the slice is empty).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + sum(xs.iter().map(|&x| (x - max).exp())).ln()
}

/// Integrand for [`tanh_sinh`]. Called with the abscissa `s` together with
/// its distances `s - a` and `b - s`, which stay accurate near the endpoints
/// where `s` itself has rounded to `a` or `b`.
pub trait EndpointIntegrand {
    fn eval(&self, s: f64, from_left: f64, from_right: f64) -> f64;
}

impl<F: Fn(f64, f64, f64) -> f64> EndpointIntegrand for F {
    fn eval(&self, s: f64, from_left: f64, from_right: f64) -> f64 {
        self(s, from_left, from_right)
    }
}

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// Uses `s = a + (b-a)(1 + tanh x)/2` with `x = (π/2) sinh t`, trapezoid in
/// `t` with step halving until two levels agree to `rel_tol`. Integrable
/// endpoint singularities are absorbed by the double-exponential decay of
/// the Jacobian.
pub fn tanh_sinh<F: EndpointIntegrand>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    let half = 0.5 * (b - a);
    // Node at parameter t. Distances to the endpoints are computed from
    // exp(-2x) so that they never cancel.
    let node = |t: f64| -> f64 {
        let x = std::f64::consts::FRAC_PI_2 * t.sinh();
        let dx = std::f64::consts::FRAC_PI_2 * t.cosh();
        // (1 + tanh x)/2 = 1/(1 + e^{-2x}), (1 - tanh x)/2 = 1/(1 + e^{2x}).
        let (left, right) = if x >= 0.0 {
            let e = (-2.0 * x).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = (2.0 * x).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        let from_left = 2.0 * half * left;
        let from_right = 2.0 * half * right;
        if from_left == 0.0 || from_right == 0.0 {
            return 0.0;
        }
        let s = if from_left <= from_right {
            a + from_left
        } else {
            b - from_right
        };
        // ds/dt = (b-a) * 2 * left * right * dx
        let jac = 2.0 * half * 2.0 * left * right * dx;
        let v = f.eval(s, from_left, from_right) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let t_max = 6.5;
    let mut step = 0.5;
    let mut total = node(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * step;
        if t > t_max {
            break;
        }
        total += node(t) + node(-t);
        k += 1;
    }
    let mut estimate = total * step;

    for _ in 0..12 {
        step *= 0.5;
        // add odd multiples of the new step
        let mut added = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * step;
            if t > t_max {
                break;
            }
            added += node(t) + node(-t);
            k += 2;
        }
        total += added;
        let next = total * step;
        if (next - estimate).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh did not reach relative tolerance {rel_tol} on [{a}, {b}]"
    )))
}
