//! `c_β = ∫₀¹ s^β (1-s)^β ds` and `d_β = ∫₀¹ s^β (1-s)^β log s ds` by
//! tanh-sinh quadrature, plus Gamma/digamma closed forms used as an
//! independent cross-check.

use crate::error::{Error, Result};
use crate::numeric::tanh_sinh;

const QUAD_TOL: f64 = 1e-13;

fn check_domain(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta}")));
    }
    if beta <= -1.0 {
        return Err(Error::DivergentIntegral(beta));
    }
    Ok(())
}

/// `∫₀¹ s^β (1-s)^β ds`, finite iff `β > -1`.
pub fn c_beta(beta: f64) -> Result<f64> {
    check_domain(beta)?;
    // s^β(1-s)^β via the endpoint distances, which stay exact near 0 and 1
    let f = |_s: f64, left: f64, right: f64| (beta * (left.ln() + right.ln())).exp();
    tanh_sinh(&f, 0.0, 1.0, QUAD_TOL)
}

/// `∫₀¹ s^β (1-s)^β log s ds`, finite iff `β > -1`.
pub fn d_beta(beta: f64) -> Result<f64> {
    check_domain(beta)?;
    let f = |_s: f64, left: f64, right: f64| {
        let ll = left.ln();
        (beta * (ll + right.ln())).exp() * ll
    };
    tanh_sinh(&f, 0.0, 1.0, QUAD_TOL)
}

/// `-2β d_β / c_β + log c_β`, the limit of `S_{r,β} - log r` as `r → ∞`
/// for `β > -1`.
pub fn entropy_gap_limit(beta: f64) -> Result<f64> {
    let c = c_beta(beta)?;
    let d = d_beta(beta)?;
    Ok(-2.0 * beta * d / c + c.ln())
}

/// Closed forms `c_β = Γ(β+1)²/Γ(2β+2)` and `d_β = c_β (ψ(β+1) - ψ(2β+2))`.
///
/// These are an oracle for the quadrature, not the primary route.
pub mod closed_form {
    use statrs::function::gamma::{digamma, ln_gamma};

    use super::check_domain;
    use crate::error::Result;

    pub fn c_beta(beta: f64) -> Result<f64> {
        check_domain(beta)?;
        Ok((2.0 * ln_gamma(beta + 1.0) - ln_gamma(2.0 * beta + 2.0)).exp())
    }

    pub fn d_beta(beta: f64) -> Result<f64> {
        Ok(c_beta(beta)? * (digamma(beta + 1.0) - digamma(2.0 * beta + 2.0)))
    }

    pub fn entropy_gap_limit(beta: f64) -> Result<f64> {
        let c = c_beta(beta)?;
        let d = d_beta(beta)?;
        Ok(-2.0 * beta * d / c + c.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn golden_values() {
        assert_relative_eq!(c_beta(1.0).unwrap(), 1.0 / 6.0, max_relative = 1e-12);
        // ∫ s(1-s) log s = ∫ s log s - ∫ s² log s = -1/4 + 1/9
        assert_relative_eq!(d_beta(1.0).unwrap(), -5.0 / 36.0, max_relative = 1e-12);
        assert_relative_eq!(c_beta(0.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(d_beta(0.0).unwrap(), -1.0, max_relative = 1e-12);
        assert_relative_eq!(c_beta(-0.5).unwrap(), PI, max_relative = 1e-12);
        assert_relative_eq!(d_beta(-0.5).unwrap(), -2.0 * PI * 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn limit_values() {
        assert_relative_eq!(
            entropy_gap_limit(1.0).unwrap(),
            5.0 / 3.0 - 6f64.ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            entropy_gap_limit(-0.5).unwrap(),
            -2.0 * 2f64.ln() + PI.ln(),
            max_relative = 1e-12
        );
        assert!(entropy_gap_limit(0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn divergent_domain_rejected() {
        for b in [-1.0, -1.5, -3.0] {
            assert!(matches!(c_beta(b), Err(Error::DivergentIntegral(_))));
            assert!(matches!(d_beta(b), Err(Error::DivergentIntegral(_))));
            assert!(entropy_gap_limit(b).is_err());
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for b in [-0.9, -0.5, -0.1, 0.5, 1.0, 2.0, 5.0] {
            let (c, cc) = (c_beta(b).unwrap(), closed_form::c_beta(b).unwrap());
            let (d, dc) = (d_beta(b).unwrap(), closed_form::d_beta(b).unwrap());
            assert_relative_eq!(c, cc, max_relative = 1e-9);
            assert_relative_eq!(d, dc, max_relative = 1e-9);
            assert!(c > 0.0 && d < 0.0);
        }
    }
}
