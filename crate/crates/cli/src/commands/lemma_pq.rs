use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toda_lab::shannon::{entropy, lemma_pq_verdict, sample_dominating_pair, sample_equal_pair};

use crate::output::{ensure_dir, write_json};
use crate::{load_config, usage, Outcome};

/// Stream offset separating the equality draws from the dominating draws.
const EQUAL_STREAM: u64 = 1 << 32;
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64(seed), stream r for dominating pairs and 2^32 + r for equality pairs";

fn default_r_min() -> usize {
    3
}
fn default_r_max() -> usize {
    8
}
fn default_count() -> usize {
    10_000
}
fn default_equal_count() -> usize {
    100
}
fn default_equal_tol() -> f64 {
    1e-12
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaPqConfig {
    #[serde(default = "default_r_min")]
    pub r_min: usize,
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_equal_count")]
    pub equal_count: usize,
    #[serde(default = "default_equal_tol")]
    pub equal_tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct RankResult {
    r: usize,
    pairs: usize,
    violations: usize,
    /// Smallest `S(P) - S(Q)` seen.
    min_margin: Option<f64>,
    first_violation: Option<String>,
    equal_pairs: usize,
    /// Largest `|S(P) - S(Q)|` over the equality-constructed pairs.
    max_equal_gap: Option<f64>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct LemmaPqReport {
    seed: u64,
    generator: &'static str,
    count: usize,
    equal_count: usize,
    equal_tolerance: f64,
    ranks: Vec<RankResult>,
    warnings: Vec<String>,
    passed: bool,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fuzz_rank(r: usize, cfg: &LemmaPqConfig, seed: u64) -> RankResult {
    let mut rng = rng_for(seed, r as u64);
    let mut violations = 0;
    let mut min_margin: Option<f64> = None;
    let mut first_violation = None;
    for i in 0..cfg.count {
        let (p, q) = sample_dominating_pair(&mut rng, r);
        match lemma_pq_verdict(&p, &q) {
            Ok(v) => {
                min_margin = Some(min_margin.map_or(v.margin, |m| m.min(v.margin)));
                if !v.holds {
                    violations += 1;
                    first_violation.get_or_insert_with(|| format!("pair {i}: margin {:e}", v.margin));
                }
            }
            Err(e) => {
                violations += 1;
                first_violation.get_or_insert_with(|| format!("pair {i}: {e}"));
            }
        }
    }
    let mut rng = rng_for(seed, EQUAL_STREAM + r as u64);
    let max_equal_gap = (0..cfg.equal_count)
        .map(|_| {
            let (p, q) = sample_equal_pair(&mut rng, r);
            (entropy(&p) - entropy(&q)).abs()
        })
        .reduce(f64::max);
    let equal_ok = max_equal_gap.is_none_or(|g| g <= cfg.equal_tolerance);
    RankResult {
        r,
        pairs: cfg.count,
        violations,
        min_margin,
        first_violation,
        equal_pairs: cfg.equal_count,
        max_equal_gap,
        passed: violations == 0 && equal_ok,
    }
}

/// Seeded fuzz of the entropy comparison for dominating pairs. Each rank has
/// its own generator stream, so the report does not depend on scheduling.
pub fn run(config: &Path, out: &Path, seed: Option<u64>) -> anyhow::Result<Outcome> {
    let cfg: LemmaPqConfig = load_config(config)?.config;
    if cfg.r_min < 2 || cfg.r_min > cfg.r_max {
        return Err(usage(format!(
            "rank range {}..={} must satisfy 2 <= r_min <= r_max",
            cfg.r_min, cfg.r_max
        )));
    }
    let seed = seed.unwrap_or(cfg.seed);
    let mut warnings = Vec::new();
    if cfg.count == 0 {
        warnings.push("count is 0: no dominating pairs sampled, the pass is vacuous".to_string());
    }
    if cfg.equal_count == 0 {
        warnings.push("equal_count is 0: the equality case is not exercised".to_string());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let ranks: Vec<RankResult> = (cfg.r_min..=cfg.r_max)
        .into_par_iter()
        .map(|r| fuzz_rank(r, &cfg, seed))
        .collect();
    for k in &ranks {
        println!(
            "r = {}: {} pairs, {} violations, max equality gap {:e} ({})",
            k.r,
            k.pairs,
            k.violations,
            k.max_equal_gap.unwrap_or(0.0),
            if k.passed { "pass" } else { "FAIL" }
        );
    }
    let passed = ranks.iter().all(|k| k.passed);
    ensure_dir(out)?;
    let report = LemmaPqReport {
        seed,
        generator: GENERATOR,
        count: cfg.count,
        equal_count: cfg.equal_count,
        equal_tolerance: cfg.equal_tolerance,
        ranks,
        warnings,
        passed,
    };
    write_json(&out.join("lemma_pq.json"), &report)?;
    Ok(Outcome::from_pass(passed))
}
