pub mod entropy;
pub mod lemma_pq;
pub mod solve;
pub mod spectrum;
pub mod verify;

use std::path::Path;

use toda_lab::persist::load_solution;
use toda_lab::toda::GridSolution;

pub fn open_solution(dir: &Path) -> anyhow::Result<GridSolution> {
    if !dir.join(toda_lab::persist::METADATA_FILE).is_file() {
        anyhow::bail!("no solution directory at {}", dir.display());
    }
    Ok(load_solution(dir)?)
}

pub fn margin_or_default(margin: Option<f64>, sol: &GridSolution) -> f64 {
    margin.unwrap_or(toda_lab::toda::DEFAULT_MARGIN_CELLS * sol.grid.h())
}

pub fn zeros_of(sol: &GridSolution) -> Vec<(f64, f64)> {
    sol.weight
        .differential()
        .map(|q| q.zeros().iter().map(|(a, _)| (a.re, a.im)).collect())
        .unwrap_or_default()
}

pub fn check_betas(betas: &[f64]) -> anyhow::Result<()> {
    if betas.is_empty() {
        return Err(crate::usage("beta list is empty"));
    }
    Ok(())
}
