use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toda_lab::toda::{
    check_prop_inequalities, entropy_field, metric_fields, sigma_field, sup_chain_check,
    EntropySummary, ExtremalCase, InequalityReport, NodeValue,
};

use super::{check_betas, margin_or_default, open_solution, zeros_of};
use crate::output::{beta_tag, ensure_dir, write_json, write_text};
use crate::{load_config, Outcome};

fn default_betas() -> Vec<f64> {
    vec![-0.5, 1.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub solution: PathBuf,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "yes")]
    pub heatmaps: bool,
    /// When set, the minimum of `S` over the 3×3 node patch around each zero
    /// of `q` must lie within this distance of the baseline `S_{r,β}`.
    #[serde(default)]
    pub zero_patch_tolerance: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ZeroPatch {
    beta: f64,
    zero: (f64, f64),
    min: NodeValue,
    baseline: f64,
    distance: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct CheckLine {
    name: String,
    passed: bool,
    margin: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    solution: PathBuf,
    r: usize,
    h: f64,
    margin: f64,
    converged: bool,
    residual: f64,
    product_identity_error: f64,
    reality_defect: f64,
    pointwise: InequalityReport,
    sup_chain: InequalityReport,
    entropy: Vec<EntropySummary>,
    zero_patches: Vec<ZeroPatch>,
    checks: Vec<CheckLine>,
    passed: bool,
}

pub fn run(config: &Path, out: &Path) -> anyhow::Result<Outcome> {
    let loaded = load_config::<VerifyConfig>(config)?;
    let cfg = &loaded.config;
    check_betas(&cfg.betas)?;
    let dir = loaded.resolve(&cfg.solution);
    let sol = open_solution(&dir)?;
    let margin = margin_or_default(cfg.margin, &sol);
    let zeros = zeros_of(&sol);
    let m = metric_fields(&sol);
    let pointwise = check_prop_inequalities(&m, margin);
    let sup_chain = sup_chain_check(&m, margin);
    let fields = cfg
        .betas
        .par_iter()
        .map(|&b| entropy_field(&m, b, margin, &zeros))
        .collect::<Result<Vec<_>, _>>()?;

    let mut zero_patches = Vec::new();
    if let Some(tol) = cfg.zero_patch_tolerance {
        for f in &fields {
            for &(x, y) in &zeros {
                if sol.grid.domain().distance_to_boundary(x, y) <= 0.0 {
                    continue;
                }
                let min = f.patch_min(x, y, 1)?;
                let distance = (min.value - f.summary.baseline).abs();
                zero_patches.push(ZeroPatch {
                    beta: f.beta,
                    zero: (x, y),
                    min,
                    baseline: f.summary.baseline,
                    distance,
                    passed: distance <= tol,
                });
            }
        }
    }

    let mut checks = vec![
        CheckLine {
            name: "converged".into(),
            passed: sol.meta.converged,
            margin: sol.meta.tolerance - sol.meta.residual,
        },
        CheckLine {
            name: "pointwise-inequalities".into(),
            passed: pointwise.passed(),
            margin: pointwise.min_slack(),
        },
        CheckLine {
            name: "sup-chain".into(),
            passed: sup_chain.passed(),
            margin: sup_chain.min_slack(),
        },
    ];
    for f in &fields {
        let s = &f.summary;
        checks.push(CheckLine {
            name: format!("entropy-lower beta={}", s.beta),
            passed: s.lower_holds,
            margin: s.lower_margin,
        });
        checks.push(CheckLine {
            name: format!("entropy-upper beta={}", s.beta),
            // attained, not strict, in the flat case
            passed: s.upper_holds || s.extremal == Some(ExtremalCase::Flat),
            margin: s.upper_margin,
        });
    }
    for z in &zero_patches {
        checks.push(CheckLine {
            name: format!("zero-patch beta={} at ({}, {})", z.beta, z.zero.0, z.zero.1),
            passed: z.passed,
            margin: cfg.zero_patch_tolerance.unwrap_or(0.0) - z.distance,
        });
    }
    for c in &checks {
        println!("{} {} (margin {:e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.margin);
    }
    let passed = checks.iter().all(|c| c.passed);

    ensure_dir(out)?;
    if cfg.heatmaps {
        for j in 1..=m.n.max(1) {
            let svg = crate::svg::heatmap(&m.grid, &sigma_field(&m, j), &format!("exp(sigma_{j})"));
            write_text(&out.join(format!("sigma_{j}.svg")), &svg)?;
        }
        for f in &fields {
            let svg = crate::svg::heatmap(&f.grid, &f.entropy, &format!("S, beta = {}", f.beta));
            write_text(&out.join(format!("entropy_beta_{}.svg", beta_tag(f.beta))), &svg)?;
        }
    }
    let report = VerifyReport {
        solution: cfg.solution.clone(),
        r: sol.r,
        h: sol.grid.h(),
        margin,
        converged: sol.meta.converged,
        residual: sol.meta.residual,
        product_identity_error: m.product_identity_error,
        reality_defect: sol.reality_defect(),
        pointwise,
        sup_chain,
        entropy: fields.into_iter().map(|f| f.summary).collect(),
        zero_patches,
        checks,
        passed,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(Outcome::from_pass(passed))
}
