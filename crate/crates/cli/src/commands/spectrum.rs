use std::path::Path;

use serde::{Deserialize, Serialize};
use toda_lab::spectrum::{
    divergence_fit, entropy_gap_limit, sandwich_check, shifted_entropy_rows, DivergenceModel,
};

use crate::output::{cell, ensure_dir, write_csv, write_json};
use crate::{load_config, usage, Outcome};

fn default_divergence_r() -> Vec<usize> {
    vec![256, 512, 1024, 2048, 4096]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub betas: Vec<f64>,
    pub r_values: Vec<usize>,
    /// Geometric r scan used for the divergence fit when β ≤ -1.
    #[serde(default = "default_divergence_r")]
    pub divergence_r: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct DivergenceSummary {
    model: DivergenceModel,
    coefficient: f64,
    intercept: f64,
    decreasing: bool,
    drop: f64,
    diverges: bool,
}

#[derive(Debug, Serialize)]
struct BetaSummary {
    beta: f64,
    error: Option<String>,
    /// `None` when the limit is `-∞` (β ≤ -1).
    limit: Option<f64>,
    final_gap: Option<f64>,
    /// `|gap|` strictly decreasing along the r list (β > -1).
    monotone: Option<bool>,
    /// Riemann-sum sandwich at every scanned r ≥ 4 (β < 0).
    sandwich_holds: Option<bool>,
    divergence: Option<DivergenceSummary>,
    verdict: &'static str,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    r_values: Vec<usize>,
    betas: Vec<BetaSummary>,
    passed: bool,
}

struct Scan {
    summary: BetaSummary,
    rows: Vec<Vec<String>>,
}

fn error_scan(beta: f64, r_values: &[usize], msg: String) -> Scan {
    let rows = r_values
        .iter()
        .map(|r| {
            vec![
                r.to_string(),
                beta.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                msg.clone(),
            ]
        })
        .collect();
    Scan {
        summary: BetaSummary {
            beta,
            error: Some(msg),
            limit: None,
            final_gap: None,
            monotone: None,
            sandwich_holds: None,
            divergence: None,
            verdict: "error",
            passed: false,
        },
        rows,
    }
}

fn scan_beta(beta: f64, cfg: &SpectrumConfig) -> Scan {
    if beta == 0.0 || !beta.is_finite() {
        return error_scan(beta, &cfg.r_values, format!("beta must be a nonzero real, got {beta}"));
    }
    let rows = match shifted_entropy_rows(beta, &cfg.r_values) {
        Ok(rows) => rows,
        Err(e) => return error_scan(beta, &cfg.r_values, e.to_string()),
    };
    let limit = if beta > -1.0 {
        match entropy_gap_limit(beta) {
            Ok(l) => Some(l),
            Err(e) => return error_scan(beta, &cfg.r_values, e.to_string()),
        }
    } else {
        None
    };
    let mut sandwich_all: Option<bool> = None;
    let mut out = Vec::with_capacity(rows.len());
    for &(r, s, shifted) in &rows {
        let sandwich = if beta < 0.0 && r >= 4 {
            match sandwich_check(r, beta) {
                Ok(v) => Some(v.holds()),
                Err(e) => return error_scan(beta, &cfg.r_values, e.to_string()),
            }
        } else {
            None
        };
        if let Some(h) = sandwich {
            sandwich_all = Some(sandwich_all.unwrap_or(true) && h);
        }
        let gap = limit.map(|l| shifted - l);
        out.push(vec![
            r.to_string(),
            beta.to_string(),
            s.to_string(),
            shifted.to_string(),
            cell(limit),
            cell(gap),
            sandwich.map(|h| if h { "pass" } else { "fail" }.to_string()).unwrap_or_default(),
            String::new(),
        ]);
    }

    let mut summary = BetaSummary {
        beta,
        error: None,
        limit,
        final_gap: None,
        monotone: None,
        sandwich_holds: sandwich_all,
        divergence: None,
        verdict: "converges",
        passed: true,
    };
    if let Some(l) = limit {
        let gaps: Vec<f64> = rows.iter().map(|&(_, _, y)| (y - l).abs()).collect();
        summary.final_gap = gaps.last().copied();
        let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
        summary.monotone = Some(monotone);
        summary.passed = monotone;
    } else {
        summary.verdict = "diverges";
        match divergence_fit(beta, &cfg.divergence_r) {
            Ok(fit) => {
                summary.passed = fit.diverges();
                if !fit.diverges() {
                    summary.verdict = "inconclusive";
                }
                summary.divergence = Some(DivergenceSummary {
                    model: fit.model,
                    coefficient: fit.coefficient,
                    intercept: fit.intercept,
                    decreasing: fit.decreasing,
                    drop: fit.drop,
                    diverges: fit.diverges(),
                });
            }
            Err(e) => {
                summary.verdict = "error";
                summary.error = Some(e.to_string());
                summary.passed = false;
            }
        }
    }
    summary.passed &= sandwich_all.unwrap_or(true);
    Scan { summary, rows: out }
}

pub fn run(config: &Path, out: &Path) -> anyhow::Result<Outcome> {
    let cfg: SpectrumConfig = load_config(config)?.config;
    if cfg.r_values.is_empty() {
        return Err(usage("r_values is empty"));
    }
    super::check_betas(&cfg.betas)?;
    if let Some(r) = cfg.r_values.iter().chain(&cfg.divergence_r).find(|&&r| r < 2) {
        return Err(usage(format!("rank r = {r} < 2")));
    }
    ensure_dir(out)?;

    let scans: Vec<Scan> = cfg.betas.iter().map(|&b| scan_beta(b, &cfg)).collect();
    let header: Vec<String> = ["r", "beta", "entropy", "shifted", "limit", "gap", "sandwich", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = scans.iter().flat_map(|s| s.rows.iter().cloned()).collect();
    write_csv(&out.join("spectrum.csv"), &header, &rows)?;

    let betas: Vec<BetaSummary> = scans.into_iter().map(|s| s.summary).collect();
    for b in &betas {
        match &b.error {
            Some(e) => println!("beta {}: error: {e}", b.beta),
            None => println!(
                "beta {}: {} (final gap {}, {})",
                b.beta,
                b.verdict,
                cell(b.final_gap),
                if b.passed { "pass" } else { "FAIL" }
            ),
        }
    }
    let passed = betas.iter().all(|b| b.passed);
    let report = SpectrumReport {
        r_values: cfg.r_values,
        betas,
        passed,
    };
    write_json(&out.join("spectrum.json"), &report)?;
    Ok(Outcome::from_pass(passed))
}
