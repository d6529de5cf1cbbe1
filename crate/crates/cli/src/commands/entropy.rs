use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toda_lab::toda::{entropy_field, metric_fields, EntropyField, EntropySummary, ExtremalCase};

use super::{check_betas, margin_or_default, open_solution, zeros_of};
use crate::output::{beta_tag, ensure_dir, write_csv, write_json};
use crate::{load_config, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub solution: PathBuf,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub margin: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BetaResult {
    beta: f64,
    file: Option<String>,
    error: Option<String>,
    summary: Option<EntropySummary>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct EntropyReport {
    solution: PathBuf,
    r: usize,
    margin: f64,
    results: Vec<BetaResult>,
    passed: bool,
}

fn field_rows(f: &EntropyField) -> Vec<Vec<String>> {
    let g = &f.grid;
    g.nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let mut row = vec![
                n.ix.to_string(),
                n.iy.to_string(),
                n.x.to_string(),
                n.y.to_string(),
                format!("{:?}", g.kind(k)).to_lowercase(),
                f.entropy[k].to_string(),
            ];
            row.extend(f.probs.iter().map(|p| p[k].to_string()));
            row
        })
        .collect()
}

/// Writes `entropy_beta_<β>.csv` per β (node columns, `S`, then
/// `p_0 … p_{r-1}`) and an `entropy.json` summary. A rejected β is
/// recorded and fails the run without stopping the others.
pub fn run(config: &Path, out: &Path) -> anyhow::Result<Outcome> {
    let loaded = load_config::<EntropyConfig>(config)?;
    let cfg = &loaded.config;
    check_betas(&cfg.betas)?;
    let sol = open_solution(&loaded.resolve(&cfg.solution))?;
    let margin = margin_or_default(cfg.margin, &sol);
    let zeros = zeros_of(&sol);
    let m = metric_fields(&sol);
    ensure_dir(out)?;

    let mut header: Vec<String> = ["ix", "iy", "x", "y", "kind", "entropy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..sol.r).map(|j| format!("p_{j}")));

    let mut results = Vec::new();
    for &beta in &cfg.betas {
        match entropy_field(&m, beta, margin, &zeros) {
            Ok(f) => {
                let name = format!("entropy_beta_{}.csv", beta_tag(beta));
                write_csv(&out.join(&name), &header, &field_rows(&f))?;
                let s = f.summary;
                let passed = s.lower_holds && (s.upper_holds || s.extremal == Some(ExtremalCase::Flat));
                println!(
                    "beta {beta}: S in [{}, {}], baseline {}, log r {} ({})",
                    s.min.value,
                    s.max.value,
                    s.baseline,
                    s.log_r,
                    if passed { "pass" } else { "FAIL" }
                );
                results.push(BetaResult {
                    beta,
                    file: Some(name),
                    error: None,
                    summary: Some(s),
                    passed,
                });
            }
            Err(e) => {
                println!("beta {beta}: error: {e}");
                results.push(BetaResult {
                    beta,
                    file: None,
                    error: Some(e.to_string()),
                    summary: None,
                    passed: false,
                });
            }
        }
    }
    let passed = results.iter().all(|r| r.passed);
    let report = EntropyReport {
        solution: cfg.solution.clone(),
        r: sol.r,
        margin,
        results,
        passed,
    };
    write_json(&out.join("entropy.json"), &report)?;
    Ok(Outcome::from_pass(passed))
}
