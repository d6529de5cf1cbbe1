use std::path::Path;

use toda_lab::persist::save_solution;
use toda_lab::toda::{solve_dirichlet, SolveConfig};
use toda_lab::Error;

use crate::output::ensure_dir;
use crate::{load_config, Outcome};

/// Solves and writes the solution directory. A stagnated solve still writes
/// its best iterate (marked unconverged) and fails.
pub fn run(config: &Path, out: &Path) -> anyhow::Result<Outcome> {
    let cfg: SolveConfig = load_config(config)?.config;
    let sol = match solve_dirichlet(&cfg) {
        Ok(sol) => sol,
        Err(Error::Stagnation { best, .. }) => *best,
        Err(e) => return Err(e.into()),
    };
    ensure_dir(out)?;
    save_solution(&sol, out)?;
    let m = &sol.meta;
    println!(
        "{} after {} iterations, residual {:e} (tolerance {:e}); written to {}",
        if m.converged { "converged" } else { "did not converge" },
        m.iterations,
        m.residual,
        m.tolerance,
        out.display()
    );
    Ok(Outcome::from_pass(m.converged))
}
