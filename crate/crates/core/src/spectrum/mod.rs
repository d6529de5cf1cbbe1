//! Cartan spectra, the baseline β-ensemble `p̂_j ∝ λ_j^β` over
//! `j = 1, …, r-1`, and the large-`r` behavior of its entropy.

mod beta_integrals;
mod cartan;

use rayon::prelude::*;
use serde::Serialize;

pub use beta_integrals::{c_beta, closed_form, d_beta, entropy_gap_limit};
pub use cartan::{inverse_cartan, lambda_exact, lambda_from_cartan, CartanMatrix, LambdaSpectrum};

use crate::error::{Error, Result};
use crate::numeric::{self, tanh_sinh};
use crate::shannon::Distribution;

/// `λ_j^β / Z_{r,β}` with its entropy, computed in log space.
#[derive(Debug, Clone, Serialize)]
pub struct BetaEnsemble {
    pub r: usize,
    pub beta: f64,
    /// `β log λ_j`, `j = 1, …, r-1`.
    pub log_weights: Vec<f64>,
    /// `log Z_{r,β}`.
    pub log_partition: f64,
    pub probs: Distribution,
    pub entropy: f64,
    /// `β = 0` lies outside the nonzero-β hypothesis; kept as a consistency row.
    pub beta_zero: bool,
}

impl BetaEnsemble {
    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }
}

fn check_rank(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidInput(format!("rank r = {r} < 2")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta} is not finite")));
    }
    Ok(())
}

pub(crate) fn log_lambda(r: usize, j: usize) -> f64 {
    ((j * (r - j)) as f64).ln()
}

pub fn ensemble(r: usize, beta: f64) -> Result<BetaEnsemble> {
    check_rank(r)?;
    check_beta(beta)?;
    let log_weights: Vec<f64> = (1..r).map(|j| beta * log_lambda(r, j)).collect();
    let log_partition = numeric::log_sum_exp(&log_weights);
    let probs = Distribution::from_log_weights(&log_weights)?;
    // −Σ p (log w − log Z) uses the exact log-probabilities rather than log p
    let entropy = -numeric::sum(
        probs
            .probs()
            .iter()
            .zip(&log_weights)
            .map(|(&p, &lw)| p * (lw - log_partition)),
    );
    Ok(BetaEnsemble {
        r,
        beta,
        log_weights,
        log_partition,
        probs,
        entropy,
        beta_zero: beta == 0.0,
    })
}

/// `S_{r,β}`.
pub fn baseline_entropy(r: usize, beta: f64) -> Result<f64> {
    Ok(ensemble(r, beta)?.entropy)
}

#[derive(Debug, Clone, Serialize)]
pub struct SrbDecomposition {
    pub entropy: f64,
    /// `Z_{r,β} / r^{2β+1}`
    pub scaled_partition: f64,
    /// `h_{r,β} = Σ_j (1/r) x_j log x_j`, `x_j = λ_j^β / r^{2β}`
    pub h: f64,
    pub recombined: f64,
    pub residual: f64,
}

/// Evaluates `S_{r,β} = -h/(Z/r^{2β+1}) + log r + log(Z/r^{2β+1})` from the
/// Riemann-sum quantities and compares with the ensemble entropy.
pub fn srb_decomposition_check(r: usize, beta: f64) -> Result<SrbDecomposition> {
    let ens = ensemble(r, beta)?;
    let ln_r = (r as f64).ln();
    let log_scaled = ens.log_partition - (2.0 * beta + 1.0) * ln_r;
    let scaled_partition = log_scaled.exp();
    let h = numeric::sum((1..r).map(|j| {
        let lx = beta * (log_lambda(r, j) - 2.0 * ln_r);
        lx.exp() * lx / r as f64
    }));
    let recombined = -h / scaled_partition + ln_r + log_scaled;
    Ok(SrbDecomposition {
        entropy: ens.entropy,
        scaled_partition,
        h,
        recombined,
        residual: (ens.entropy - recombined).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub r: usize,
    pub beta: f64,
    pub entropy: f64,
    /// `S_{r,β} - log r`
    pub shifted: f64,
    /// `shifted - limit`; `None` where the limit is `-∞`.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceScan {
    pub beta: f64,
    pub limit: f64,
    pub rows: Vec<ScanRow>,
    /// `|gap|` strictly decreasing along the scan order.
    pub monotone: bool,
    /// For `β >= 0`: `r |gap|` never exceeds twice its first value.
    pub first_order: Option<bool>,
}

/// `(r, S_{r,β} - log r)` rows, data-parallel, in input order.
pub fn shifted_entropy_rows(beta: f64, r_values: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    r_values
        .par_iter()
        .map(|&r| {
            let s = baseline_entropy(r, beta)?;
            Ok((r, s, s - (r as f64).ln()))
        })
        .collect()
}

pub fn limit_convergence_scan(beta: f64, r_values: &[usize]) -> Result<ConvergenceScan> {
    if r_values.is_empty() {
        return Err(Error::InvalidInput("empty r list".into()));
    }
    let limit = entropy_gap_limit(beta)?;
    let rows: Vec<ScanRow> = shifted_entropy_rows(beta, r_values)?
        .into_iter()
        .map(|(r, entropy, shifted)| ScanRow {
            r,
            beta,
            entropy,
            shifted,
            gap: Some(shifted - limit),
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|row| row.gap.unwrap().abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let first_order = (beta >= 0.0).then(|| {
        let first = rows[0].r as f64 * gaps[0];
        rows.iter()
            .zip(&gaps)
            .all(|(row, g)| row.r as f64 * g <= 2.0 * first)
    });
    Ok(ConvergenceScan {
        beta,
        limit,
        rows,
        monotone,
        first_order,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichVerdict {
    pub r: usize,
    pub beta: f64,
    /// `∫_{1/r}^{1-1/r} s^β (1-s)^β ds`
    pub integral: f64,
    /// `Z_{r,β} / r^{2β+1}`
    pub scaled_partition: f64,
    /// `integral + 2 (r-1)^β / r^{2β+1}`
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SandwichVerdict {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Riemann-sum sandwich of the scaled partition function for `β < 0`.
pub fn sandwich_check(r: usize, beta: f64) -> Result<SandwichVerdict> {
    check_beta(beta)?;
    if !(beta < 0.0) {
        return Err(Error::InvalidInput(format!("sandwich needs beta < 0, got {beta}")));
    }
    if r < 4 {
        return Err(Error::InvalidInput(format!("sandwich needs r >= 4, got {r}")));
    }
    let rf = r as f64;
    let a = 1.0 / rf;
    // symmetric about 1/2; integrate the left half in log-coordinates
    // s = e^x where the integrand e^{(β+1)x}(1-e^x)^β is smooth
    let f = |x: f64, _: f64, _: f64| {
        let s = x.exp();
        ((beta + 1.0) * x + beta * (-s).ln_1p()).exp()
    };
    let integral = 2.0 * tanh_sinh(&f, a.ln(), 0.5f64.ln(), 1e-13)?;
    let ens = ensemble(r, beta)?;
    let scaled_partition = (ens.log_partition - (2.0 * beta + 1.0) * rf.ln()).exp();
    let upper = integral + 2.0 * ((rf - 1.0).ln() * beta - (2.0 * beta + 1.0) * rf.ln()).exp();
    Ok(SandwichVerdict {
        r,
        beta,
        integral,
        scaled_partition,
        upper,
        lower_holds: integral <= scaled_partition,
        upper_holds: scaled_partition <= upper,
    })
}

/// Leading-order model used to fit `S_{r,β} - log r` when `β <= -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceModel {
    /// `β = -1`: `a - C log r + log log r`, from
    /// `Z/r^{2β+1} ~ C_{-1} log r` and `h ~ C'_{-1} (log r)²`.
    LogOverLog,
    /// `β < -1`: `a - C log r`, from `Z/r^{2β+1} ~ C_β r^{-β-1}` and
    /// `h ~ C'_β r^{-β-1} log r`.
    PowerLaw,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceFit {
    pub beta: f64,
    /// `(r, S_{r,β} - log r)`
    pub samples: Vec<(usize, f64)>,
    pub model: DivergenceModel,
    /// Fitted coefficient `C` of `-log r`.
    pub coefficient: f64,
    pub intercept: f64,
    /// Samples strictly decreasing in `r`.
    pub decreasing: bool,
    /// First sample minus last sample.
    pub drop: f64,
}

impl DivergenceFit {
    pub fn diverges(&self) -> bool {
        self.coefficient > 0.0 && self.decreasing
    }
}

/// Least-squares fit of the leading divergent form on a geometric scan.
pub fn divergence_fit(beta: f64, r_values: &[usize]) -> Result<DivergenceFit> {
    check_beta(beta)?;
    if beta > -1.0 {
        return Err(Error::InvalidInput(format!(
            "divergence fit needs beta <= -1, got {beta}"
        )));
    }
    if r_values.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "divergence fit needs at least 4 samples, got {}",
            r_values.len()
        )));
    }
    if r_values.iter().any(|&r| r < 2) || r_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("r values must be increasing and >= 2".into()));
    }
    let ratio = r_values[1] as f64 / r_values[0] as f64;
    if r_values
        .windows(2)
        .any(|w| ((w[1] as f64 / w[0] as f64) - ratio).abs() > 1e-9 * ratio)
    {
        return Err(Error::InvalidInput("r values must form a geometric sequence".into()));
    }
    let rows = shifted_entropy_rows(beta, r_values)?;
    let samples: Vec<(usize, f64)> = rows.iter().map(|&(r, _, y)| (r, y)).collect();
    let model = if beta == -1.0 {
        DivergenceModel::LogOverLog
    } else {
        DivergenceModel::PowerLaw
    };
    // y - offset(r) = a - C x with x = log r
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(r, y)| {
            let x = (r as f64).ln();
            let offset = match model {
                DivergenceModel::LogOverLog => x.ln(),
                DivergenceModel::PowerLaw => 0.0,
            };
            (x, y - offset)
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);
    let drop = samples[0].1 - samples[samples.len() - 1].1;
    Ok(DivergenceFit {
        beta,
        samples,
        model,
        coefficient: -slope,
        intercept: my - slope * mx,
        decreasing,
        drop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn baseline_golden_values() {
        for beta in [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0] {
            assert_abs_diff_eq!(baseline_entropy(2, beta).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(baseline_entropy(3, beta).unwrap(), 2f64.ln(), epsilon = 1e-12);
        }
        // p̂ = (3,4,3)/10
        let e = ensemble(4, 1.0).unwrap();
        assert_abs_diff_eq!(e.probs.probs()[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e.entropy, 1.088900, epsilon = 1e-6);
    }

    #[test]
    fn large_beta_and_rank_stay_finite() {
        let e = ensemble(100_000, 50.0).unwrap();
        assert!(e.entropy.is_finite() && e.log_partition.is_finite());
        let e = ensemble(100_000, -50.0).unwrap();
        assert!(e.entropy.is_finite());
        // β = −50 concentrates on j = 1 and j = r−1
        assert_abs_diff_eq!(e.entropy, 2f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn beta_zero_is_flagged_uniform() {
        let e = ensemble(7, 0.0).unwrap();
        assert!(e.beta_zero);
        assert_abs_diff_eq!(e.entropy, 6f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn srb_examples() {
        assert!(srb_decomposition_check(5, 1.0).unwrap().residual < 1e-10);
        assert!(srb_decomposition_check(3, -0.5).unwrap().residual < 1e-10);
        assert!(srb_decomposition_check(2, 2.0).unwrap().residual < 1e-12);
    }

    #[test]
    fn convergence_examples() {
        let scan = limit_convergence_scan(1.0, &[5000]).unwrap();
        assert!(scan.rows[0].gap.unwrap().abs() <= 0.01);
        let scan = limit_convergence_scan(2.0, &[100, 200, 400]).unwrap();
        assert!(scan.monotone);
        assert_eq!(scan.first_order, Some(true));
        let sanity = limit_convergence_scan(1.0, &[2]).unwrap();
        let expected = 0.0 - 2f64.ln() - (5.0 / 3.0 - 6f64.ln());
        assert_abs_diff_eq!(sanity.rows[0].gap.unwrap(), expected, epsilon = 1e-12);
        assert!(limit_convergence_scan(-1.0, &[10]).is_err());
        assert!(limit_convergence_scan(1.0, &[]).is_err());
    }

    #[test]
    fn sandwich_examples() {
        for (r, b) in [(10, -0.5), (100, -1.0), (1000, -2.0)] {
            let v = sandwich_check(r, b).unwrap();
            assert!(v.holds(), "{v:?}");
        }
        assert!(sandwich_check(3, -0.5).is_err());
        assert!(sandwich_check(10, 0.5).is_err());
    }

    #[test]
    fn sandwich_integral_closed_form() {
        // β = −1: ∫ 1/(s(1−s)) = 2 log((1−a)/a) on [a, 1−a]
        let v = sandwich_check(100, -1.0).unwrap();
        let a: f64 = 0.01;
        assert_abs_diff_eq!(v.integral, 2.0 * ((1.0 - a) / a).ln(), epsilon = 1e-11);
        // the scaled partition at β = −1 is 2 H_{r−1}
        let harmonic: f64 = (1..100).map(|j| 1.0 / j as f64).sum();
        assert_abs_diff_eq!(v.scaled_partition, 2.0 * harmonic, epsilon = 1e-11);
    }

    #[test]
    fn divergence_examples() {
        let fit = divergence_fit(-1.0, &[256, 512, 1024, 2048, 4096]).unwrap();
        assert!(fit.decreasing && fit.drop >= 0.5 && fit.coefficient > 0.0);
        assert_eq!(fit.model, DivergenceModel::LogOverLog);
        let fit = divergence_fit(-2.0, &[64, 128, 256, 512, 1024]).unwrap();
        assert!(fit.decreasing && fit.coefficient > 0.0);
        assert!(divergence_fit(-1.0, &[256, 512, 1024]).is_err());
        assert!(divergence_fit(-1.0, &[256, 512, 1000, 2048]).is_err());
        assert!(divergence_fit(-0.5, &[256, 512, 1024, 2048]).is_err());
    }
}
