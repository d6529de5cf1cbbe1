//! Convergence tables on nested grids.
//!
//! Norms are sups over a fixed set of coarse-grid nodes (the coarse test
//! region, minus a disc around each zero of `q`), located on every finer
//! grid through the shared lattice offset.

use serde::Serialize;

use super::solver::{exact_extremal_solution, solve_dirichlet, ExtremalKind};
use super::{residual, GridSolution, SolveConfig};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridSpec};
use crate::weights::WeightSpec;

/// Band accepted as second-order: the error ratio per halving.
pub const SECOND_ORDER_BAND: (f64, f64) = (3.5, 4.5);

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RefinementKind {
    /// Residual of a closed-form solution sampled on each grid.
    Exact {
        extremal: ExtremalKind,
        r: usize,
        weight: WeightSpec,
    },
    /// Newton solve on each grid; the grid in the config is replaced.
    Solve { config: SolveConfig },
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub h: f64,
    /// Residual sup over the common nodes.
    pub residual: f64,
    /// Sup over the common nodes of `|u_j - u_j(previous level)|`.
    pub difference: Option<f64>,
    pub residual_ratio: Option<f64>,
    pub difference_ratio: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementTable {
    pub common_nodes: usize,
    pub rows: Vec<RefinementRow>,
    /// Residual ratios (exact kinds) or difference ratios (solves) all in
    /// [`SECOND_ORDER_BAND`].
    pub second_order: bool,
}

/// `levels` grids starting at `base`, halving `h` each time with the same
/// absolute offset.
pub fn nested_levels(base: &GridSpec, levels: usize) -> Vec<GridSpec> {
    let offset = base.resolved_offset();
    (0..levels)
        .map(|l| GridSpec {
            domain: base.domain,
            h: base.h / f64::powi(2.0, l as i32),
            offset: Some(offset),
        })
        .collect()
}

/// Runs `kind` on each grid of `grids` (coarsest first) and tabulates the
/// residual and successive-difference norms.
///
/// `margin` selects the coarse test region; nodes within `exclusion` of a
/// zero of `q` are left out.
pub fn refinement_study(
    kind: &RefinementKind,
    grids: &[GridSpec],
    margin: f64,
    exclusion: f64,
) -> Result<RefinementTable> {
    if grids.len() < 2 {
        return Err(Error::InvalidInput("need at least two grid levels".into()));
    }
    let built: Vec<Grid2D> = grids.iter().map(Grid2D::new).collect::<Result<_>>()?;
    for w in built.windows(2) {
        if w[1].refinement_factor(&w[0])? != 2 {
            return Err(Error::NotNested("successive levels must halve h".into()));
        }
    }
    let coarse = &built[0];
    let zeros: Vec<(f64, f64)> = match kind {
        RefinementKind::Exact { weight, .. } => zero_list(weight),
        RefinementKind::Solve { config } => zero_list(&config.weight),
    };
    let common: Vec<usize> = coarse
        .test_region(margin)
        .into_iter()
        .filter(|&k| {
            let n = coarse.node(k);
            zeros.iter().all(|(a, b)| (n.x - a).hypot(n.y - b) > exclusion)
        })
        .collect();
    if common.is_empty() {
        return Err(Error::InvalidInput("no common nodes survive the margin and exclusion".into()));
    }

    let mut rows: Vec<RefinementRow> = Vec::new();
    let mut prev: Option<(GridSolution, Vec<usize>)> = None;
    for spec in grids {
        let sol = match kind {
            RefinementKind::Exact {
                extremal,
                r,
                weight,
            } => exact_extremal_solution(*extremal, spec, *r, weight)?,
            RefinementKind::Solve { config } => {
                let mut c = config.clone();
                c.grid = *spec;
                solve_dirichlet(&c)?
            }
        };
        let idx = sol.grid.embed(coarse, &common)?;
        let res = residual(&sol);
        let residual_sup = idx
            .iter()
            .flat_map(|&k| res.iter().map(move |f| f[k].abs()))
            .fold(0.0, f64::max);
        let difference = prev.as_ref().map(|(p, pidx)| {
            idx.iter()
                .zip(pidx)
                .flat_map(|(&k, &pk)| sol.u.iter().zip(&p.u).map(move |(a, b)| (a[k] - b[pk]).abs()))
                .fold(0.0, f64::max)
        });
        let last = rows.last();
        let residual_ratio = last.map(|l| l.residual / residual_sup);
        let difference_ratio = match (last.and_then(|l| l.difference), difference) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        rows.push(RefinementRow {
            h: spec.h,
            residual: residual_sup,
            difference,
            residual_ratio,
            difference_ratio,
            iterations: sol.meta.iterations,
        });
        prev = Some((sol, idx));
    }
    let in_band = |x: f64| x >= SECOND_ORDER_BAND.0 && x <= SECOND_ORDER_BAND.1;
    let ratios: Vec<f64> = match kind {
        RefinementKind::Exact { .. } => rows.iter().filter_map(|r| r.residual_ratio).collect(),
        RefinementKind::Solve { .. } => rows.iter().filter_map(|r| r.difference_ratio).collect(),
    };
    Ok(RefinementTable {
        common_nodes: common.len(),
        second_order: !ratios.is_empty() && ratios.into_iter().all(in_band),
        rows,
    })
}

fn zero_list(w: &WeightSpec) -> Vec<(f64, f64)> {
    w.differential()
        .map(|q| q.zeros().iter().map(|(a, _)| (a.re, a.im)).collect())
        .unwrap_or_default()
}
