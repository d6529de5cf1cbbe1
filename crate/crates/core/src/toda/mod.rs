//! The cyclic Toda system
//!
//! ```text
//! Δu_j = 8 e^{u_j} - 4 e^{u_{j-1}} - 4 e^{u_{j+1}},   j = 1, …, r-1,
//! e^{u_0} = e^{u_r} = |q|² exp(-Σ_k u_k),
//! ```
//!
//! on planar grids with the five-point Laplacian. The chart convention is
//! `i∂∂̄u = (Δu/2) dx dy` and `vol(H) = 2 e^u dx dy`; both extremal closed
//! forms (`u_j = φ` for flat weights, `u_j = log λ_j - 2 log(1-|z|²)` for the
//! `-∞` token) satisfy it exactly in the continuum.

mod cholesky;
mod entropy;
mod inequalities;
mod refinement;
mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{Grid2D, GridSpec};
use crate::weights::{NodeWeights, WeightClass, WeightSpec};

pub use cholesky::{EnvelopeCholesky, EnvelopeMatrix};
pub use entropy::{entropy_field, EntropyField, EntropySummary, NodeValue};
pub use inequalities::{
    check_prop_inequalities, sigma_field, sigma_prime_field, sup_chain_check, ExtremalCase,
    InequalityCheck, InequalityReport, SupQuantity, DEFAULT_MARGIN_CELLS, SLACK_TOL,
};
pub use refinement::{
    nested_levels, refinement_study, RefinementKind, RefinementRow, RefinementTable,
    SECOND_ORDER_BAND,
};
pub use solver::{exact_extremal_solution, solve_dirichlet, ExtremalKind};

/// Default Newton tolerance on the residual sup-norm.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Dirichlet data on the boundary ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundary {
    /// `u_j = φ`.
    FlatLike,
    /// `u_j = log λ_j - 2 log(1 - |z|²)`; disc domains inside the unit disc.
    HyperbolicLike,
    /// Constant `u_j = values[j-1]`.
    Custom { values: Vec<f64> },
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_max_iterations() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub r: usize,
    pub weight: WeightSpec,
    pub grid: GridSpec,
    pub boundary: Boundary,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Increasing ladder of `t` values for the continuation `q ↦ t q`.
    /// Empty means a direct solve, falling back to a default ladder if
    /// Newton stalls.
    #[serde(default)]
    pub continuation: Vec<f64>,
}

impl SolveConfig {
    pub fn new(r: usize, weight: WeightSpec, grid: GridSpec, boundary: Boundary) -> Self {
        Self {
            r,
            weight,
            grid,
            boundary,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: default_max_iterations(),
            continuation: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Newton,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: SolveMethod,
    pub iterations: usize,
    /// Sup-norm of the discrete residual over interior nodes.
    pub residual: f64,
    pub tolerance: f64,
    pub converged: bool,
    /// Residual after each accepted Newton step, starting with the guess.
    pub residual_history: Vec<f64>,
    /// Step lengths accepted by the line search.
    pub step_lengths: Vec<f64>,
    /// Continuation parameters actually used.
    pub continuation: Vec<f64>,
}

/// Log-density fields `u_1, …, u_{r-1}` at every grid node.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub r: usize,
    pub grid: Grid2D,
    pub weight: WeightSpec,
    pub node_weights: NodeWeights,
    pub boundary: Boundary,
    /// `u[j-1][node]`; boundary nodes carry the Dirichlet data.
    pub u: Vec<Vec<f64>>,
    pub meta: SolverMeta,
}

impl GridSolution {
    pub fn residual(&self) -> Vec<Vec<f64>> {
        residual(self)
    }

    pub fn sup_residual(&self) -> f64 {
        sup_abs(self.residual().iter().flatten().copied())
    }

    /// `max |u_j - u_{r-j}|` over all nodes.
    pub fn reality_defect(&self) -> f64 {
        let m = self.r - 1;
        sup_abs(
            (0..m).flat_map(|j| {
                let (a, b) = (&self.u[j], &self.u[m - 1 - j]);
                a.iter().zip(b).map(|(x, y)| x - y)
            }),
        )
    }
}

/// Largest absolute value; any NaN makes the result infinite.
pub(crate) fn sup_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |acc: f64, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            acc.max(v.abs())
        }
    })
}

/// `R_j = Δ_h u_j - 8 e^{u_j} + 4 e^{u_{j-1}} + 4 e^{u_{j+1}}` at interior
/// nodes, `R[j-1][k]`.
pub fn residual(sol: &GridSolution) -> Vec<Vec<f64>> {
    residual_of(&sol.grid, sol.r, &sol.u, &sol.node_weights.q2)
}

pub(crate) fn residual_of(grid: &Grid2D, r: usize, u: &[Vec<f64>], q2: &[f64]) -> Vec<Vec<f64>> {
    let m = r - 1;
    let n = grid.n_interior();
    let h2 = grid.h() * grid.h();
    let e0: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| degenerate_density(q2[k], (0..m).map(|j| u[j][k])))
        .collect();
    (0..m)
        .map(|j| {
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let nb = grid.neighbors(k);
                    let uj = &u[j];
                    let lap = (uj[nb[0]] + uj[nb[1]] + uj[nb[2]] + uj[nb[3]] - 4.0 * uj[k]) / h2;
                    let below = if j == 0 { e0[k] } else { u[j - 1][k].exp() };
                    let above = if j + 1 == m { e0[k] } else { u[j + 1][k].exp() };
                    lap - 8.0 * uj[k].exp() + 4.0 * below + 4.0 * above
                })
                .collect()
        })
        .collect()
}

/// `e^{u_0} = |q|² exp(-Σ u_k)`, exactly zero where `|q|² = 0`.
pub(crate) fn degenerate_density(q2: f64, u: impl Iterator<Item = f64>) -> f64 {
    if q2 == 0.0 {
        0.0
    } else {
        q2 * (-crate::numeric::sum(u)).exp()
    }
}

/// Volume densities `e^{u_0}, …, e^{u_{r-1}}` in log form.
#[derive(Debug, Clone)]
pub struct MetricFields {
    pub r: usize,
    /// `⌊r/2⌋`
    pub n: usize,
    /// `r - 2n`
    pub delta: usize,
    pub grid: Grid2D,
    pub weight_class: WeightClass,
    /// `log_density[j][node] = u_j`, with `u_0 = log|q|² - Σ u_k` (`-inf` at
    /// zeros and for the `-∞` token).
    pub log_density: Vec<Vec<f64>>,
    /// `e^{u_0}` at every node.
    pub degenerate: Vec<f64>,
    /// Worst relative error of `e^{u_0} Π e^{u_k} = |q|²`.
    pub product_identity_error: f64,
}

impl MetricFields {
    pub fn density(&self, j: usize, node: usize) -> f64 {
        if j == 0 {
            self.degenerate[node]
        } else {
            self.log_density[j][node].exp()
        }
    }
}

pub fn metric_fields(sol: &GridSolution) -> MetricFields {
    let r = sol.r;
    let nodes = sol.grid.node_count();
    let q2 = &sol.node_weights.q2;
    let degenerate: Vec<f64> = (0..nodes)
        .map(|k| degenerate_density(q2[k], sol.u.iter().map(|f| f[k])))
        .collect();
    let log0: Vec<f64> = (0..nodes)
        .map(|k| {
            if q2[k] == 0.0 {
                f64::NEG_INFINITY
            } else {
                q2[k].ln() - crate::numeric::sum(sol.u.iter().map(|f| f[k]))
            }
        })
        .collect();
    let product_identity_error = (0..nodes)
        .map(|k| {
            let prod = sol.u.iter().fold(degenerate[k], |acc, f| acc * f[k].exp());
            if q2[k] == 0.0 {
                prod.abs()
            } else {
                (prod / q2[k] - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);
    let mut log_density = Vec::with_capacity(r);
    log_density.push(log0);
    log_density.extend(sol.u.iter().cloned());
    let n = r / 2;
    MetricFields {
        r,
        n,
        delta: r - 2 * n,
        grid: sol.grid.clone(),
        weight_class: crate::weights::classify_weight(&sol.weight),
        log_density,
        degenerate,
        product_identity_error,
    }
}
