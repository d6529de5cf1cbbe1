//! Damped Newton iteration for the Dirichlet problem, and the two closed-form
//! extremal solutions.
//!
//! Writing the system as `F = Δu - 4 C diag(e^u) 1 + 4 e^{u_0} (e_1 + e_{r-1})`
//! with the Cartan matrix `C`, and using `C 1 = e_1 + e_{r-1}`, the Jacobian
//! satisfies
//!
//! ```text
//! -C⁻¹ J = C⁻¹ ⊗ (-Δ_h) + 4 diag(e^u) + 4 e^{u_0} 1 1ᵀ   (per node),
//! ```
//!
//! which is symmetric positive definite. Each step solves that system with
//! an envelope Cholesky factorization in node-major order.

use serde::{Deserialize, Serialize};

use super::cholesky::EnvelopeMatrix;
use super::{
    residual_of, sup_abs, Boundary, GridSolution, SolveConfig, SolveMethod, SolverMeta,
    DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid2D, GridSpec};
use crate::spectrum::inverse_cartan;
use crate::weights::{NodeWeights, WeightSpec};

/// Ladder used when a direct solve stalls and no ladder was configured.
const FALLBACK_LADDER: [f64; 5] = [0.0625, 0.125, 0.25, 0.5, 1.0];
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

fn log_lambda(r: usize, j: usize) -> f64 {
    ((j * (r - j)) as f64).ln()
}

/// Fields obtained by evaluating the boundary formula at every node. Used as
/// Dirichlet data on the ring and as the initial guess inside.
fn boundary_extension(
    boundary: &Boundary,
    r: usize,
    grid: &Grid2D,
    w: &NodeWeights,
) -> Result<Vec<Vec<f64>>> {
    let m = r - 1;
    let nodes = grid.node_count();
    let fields: Vec<Vec<f64>> = match boundary {
        Boundary::FlatLike => vec![w.phi.clone(); m],
        Boundary::HyperbolicLike => {
            if !matches!(grid.domain(), Domain::Disc { .. }) {
                return Err(Error::Boundary("hyperbolic-like data needs a disc domain".into()));
            }
            let base: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|n| -2.0 * (-(n.x * n.x + n.y * n.y)).ln_1p())
                .collect();
            (1..=m)
                .map(|j| base.iter().map(|b| log_lambda(r, j) + b).collect())
                .collect()
        }
        Boundary::Custom { values } => {
            if values.len() != m {
                return Err(Error::Boundary(format!(
                    "{} custom values for r - 1 = {m} fields",
                    values.len()
                )));
            }
            values.iter().map(|&v| vec![v; nodes]).collect()
        }
    };
    for (j, f) in fields.iter().enumerate() {
        if let Some(k) = (grid.n_interior()..nodes).find(|&k| !f[k].is_finite()) {
            let n = grid.node(k);
            return Err(Error::Boundary(format!(
                "u_{} is {} at boundary node ({}, {})",
                j + 1,
                f[k],
                n.x,
                n.y
            )));
        }
    }
    Ok(fields)
}

struct NewtonOutcome {
    u: Vec<Vec<f64>>,
    residual: f64,
    history: Vec<f64>,
    steps: Vec<f64>,
    converged: bool,
}

fn envelope_starts(grid: &Grid2D, m: usize) -> Vec<usize> {
    let mut first = Vec::with_capacity(grid.n_interior() * m);
    for k in 0..grid.n_interior() {
        let start = grid
            .neighbors(k)
            .iter()
            .filter(|&&nb| nb < k)
            .fold(k, |a, &nb| a.min(nb))
            * m;
        first.extend(std::iter::repeat_n(start, m));
    }
    first
}

fn newton(
    grid: &Grid2D,
    r: usize,
    q2: &[f64],
    mut u: Vec<Vec<f64>>,
    tol: f64,
    max_iterations: usize,
) -> Result<NewtonOutcome> {
    let m = r - 1;
    let n = grid.n_interior();
    let h2 = grid.h() * grid.h();
    let cinv = inverse_cartan(m);
    let first = envelope_starts(grid, m);

    let mut f = residual_of(grid, r, &u, q2);
    let mut res = sup_abs(f.iter().flatten().copied());
    let mut history = vec![res];
    let mut steps = Vec::new();

    while res > tol && steps.len() < max_iterations {
        let mut a = EnvelopeMatrix::zeros(first.clone());
        let mut rhs = vec![0.0; n * m];
        for k in 0..n {
            let sum_u = crate::numeric::sum((0..m).map(|j| u[j][k]));
            let e0 = if q2[k] == 0.0 { 0.0 } else { q2[k] * (-sum_u).exp() };
            for j in 0..m {
                let row = k * m + j;
                for j2 in 0..=j {
                    let mut v = 4.0 * cinv[j][j2] + 4.0 * h2 * e0;
                    if j2 == j {
                        v += 4.0 * h2 * u[j][k].exp();
                    }
                    a.add(row, k * m + j2, v);
                }
                for &nb in grid.neighbors(k).iter().filter(|&&nb| nb < k) {
                    for j2 in 0..m {
                        a.add(row, nb * m + j2, -cinv[j][j2]);
                    }
                }
                rhs[row] = h2 * (0..m).map(|j2| cinv[j][j2] * f[j2][k]).sum::<f64>();
            }
        }
        let chol = a.factor()?;
        chol.solve(&mut rhs);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = u.clone();
            for k in 0..n {
                for j in 0..m {
                    trial[j][k] += alpha * rhs[k * m + j];
                }
            }
            let ft = residual_of(grid, r, &trial, q2);
            let rt = sup_abs(ft.iter().flatten().copied());
            if rt <= (1.0 - ARMIJO * alpha) * res {
                accepted = Some((trial, ft, rt));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, ft, rt)) => {
                u = trial;
                f = ft;
                res = rt;
                history.push(res);
                steps.push(alpha);
            }
            None => break,
        }
    }
    Ok(NewtonOutcome {
        u,
        converged: res <= tol,
        residual: res,
        history,
        steps,
    })
}

fn check_config(cfg: &SolveConfig) -> Result<()> {
    if cfg.r < 2 {
        return Err(Error::InvalidInput(format!("rank r = {} < 2", cfg.r)));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {}", cfg.tolerance)));
    }
    let c = &cfg.continuation;
    if c.iter().any(|t| !(*t > 0.0) || !t.is_finite())
        || c.windows(2).any(|w| w[0] >= w[1])
        || c.last().is_some_and(|&t| t > 1.0)
    {
        return Err(Error::InvalidInput(format!(
            "continuation ladder {c:?} must be increasing within (0, 1]"
        )));
    }
    Ok(())
}

fn run_ladder(cfg: &SolveConfig, grid: &Grid2D, ladder: &[f64]) -> Result<GridSolution> {
    let mut u: Option<Vec<Vec<f64>>> = None;
    let mut history = Vec::new();
    let mut steps = Vec::new();
    let mut last = None;
    for &t in ladder {
        let weight = cfg.weight.scaled(t);
        let nw = weight.at_nodes(grid, cfg.r)?;
        let ext = boundary_extension(&cfg.boundary, cfg.r, grid, &nw)?;
        let guess = match u.take() {
            None => ext,
            Some(mut prev) => {
                // keep the previous interior, take the new ring
                for (p, e) in prev.iter_mut().zip(&ext) {
                    p[grid.n_interior()..].copy_from_slice(&e[grid.n_interior()..]);
                }
                prev
            }
        };
        let out = newton(grid, cfg.r, &nw.q2, guess, cfg.tolerance, cfg.max_iterations)?;
        history.extend_from_slice(&out.history);
        steps.extend_from_slice(&out.steps);
        let converged = out.converged;
        u = Some(out.u.clone());
        last = Some((out, nw));
        if !converged {
            break;
        }
    }
    let (out, nw) = last.expect("ladder is never empty");
    Ok(GridSolution {
        r: cfg.r,
        grid: grid.clone(),
        weight: cfg.weight.clone(),
        node_weights: nw,
        boundary: cfg.boundary.clone(),
        u: out.u,
        meta: SolverMeta {
            method: SolveMethod::Newton,
            iterations: steps.len(),
            residual: out.residual,
            tolerance: cfg.tolerance,
            converged: out.converged,
            residual_history: history,
            step_lengths: steps,
            continuation: ladder.to_vec(),
        },
    })
}

/// Solves the Dirichlet problem by damped Newton iteration, with Armijo
/// backtracking on the residual sup-norm.
///
/// Returns [`Error::Stagnation`] carrying the best iterate when the
/// tolerance is not reached.
pub fn solve_dirichlet(cfg: &SolveConfig) -> Result<GridSolution> {
    check_config(cfg)?;
    let grid = Grid2D::new(&cfg.grid)?;
    let mut ladder = cfg.continuation.clone();
    if ladder.last() != Some(&1.0) {
        ladder.push(1.0);
    }
    let mut sol = run_ladder(cfg, &grid, &ladder)?;
    if !sol.meta.converged && cfg.continuation.is_empty() && cfg.weight != WeightSpec::MinusInfinity
    {
        let retry = run_ladder(cfg, &grid, &FALLBACK_LADDER)?;
        if retry.meta.converged || retry.meta.residual < sol.meta.residual {
            sol = retry;
        }
    }
    if sol.meta.converged {
        Ok(sol)
    } else {
        Err(Error::Stagnation {
            iterations: sol.meta.iterations,
            residual: sol.meta.residual,
            best: Box::new(sol),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremalKind {
    /// `u_j = φ`, for weights whose `q` has no zeros near the grid.
    Flat,
    /// `u_j = log λ_j - 2 log(1 - |z|²)`, for the `-∞` token on a disc.
    Hyperbolic,
}

/// Closed-form extremal solution sampled on the grid.
pub fn exact_extremal_solution(
    kind: ExtremalKind,
    grid: &GridSpec,
    r: usize,
    weight: &WeightSpec,
) -> Result<GridSolution> {
    if r < 2 {
        return Err(Error::InvalidInput(format!("rank r = {r} < 2")));
    }
    let grid = Grid2D::new(grid)?;
    let boundary = match (kind, weight) {
        (ExtremalKind::Flat, WeightSpec::Differential { q }) => {
            let reach = 2.0 * grid.h();
            if let Some((a, _)) = q
                .zeros()
                .iter()
                .find(|(a, _)| grid.domain().distance_to_boundary(a.re, a.im) > -reach)
            {
                return Err(Error::KindMismatch(format!(
                    "q vanishes at {a}, inside or next to the domain"
                )));
            }
            Boundary::FlatLike
        }
        (ExtremalKind::Hyperbolic, WeightSpec::MinusInfinity) => {
            if !matches!(grid.domain(), Domain::Disc { .. }) {
                return Err(Error::KindMismatch("hyperbolic solution needs a disc".into()));
            }
            if grid.nodes().iter().any(|n| n.x.hypot(n.y) >= 1.0) {
                return Err(Error::KindMismatch(
                    "grid nodes reach the unit circle; shrink the disc".into(),
                ));
            }
            Boundary::HyperbolicLike
        }
        (k, w) => {
            return Err(Error::KindMismatch(format!(
                "{k:?} solution is not available for weight {w:?}"
            )))
        }
    };
    let nw = weight.at_nodes(&grid, r)?;
    let u = boundary_extension(&boundary, r, &grid, &nw)?;
    let res = sup_abs(residual_of(&grid, r, &u, &nw.q2).iter().flatten().copied());
    Ok(GridSolution {
        r,
        grid,
        weight: weight.clone(),
        node_weights: nw,
        boundary,
        u,
        meta: SolverMeta {
            method: SolveMethod::Exact,
            iterations: 0,
            residual: res,
            tolerance: DEFAULT_TOLERANCE,
            converged: res <= DEFAULT_TOLERANCE,
            residual_history: vec![res],
            step_lengths: Vec::new(),
            continuation: Vec::new(),
        },
    })
}
