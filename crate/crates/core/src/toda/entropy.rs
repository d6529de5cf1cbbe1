//! Pointwise entropy of the distribution `p_j ∝ vol(H_j)^β`, `j = 0, …, r-1`.

use rayon::prelude::*;
use serde::Serialize;

use super::inequalities::{detect_extremal, ExtremalCase};
use super::MetricFields;
use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::numeric::log_sum_exp;
use crate::shannon::entropy_of;
use crate::spectrum::baseline_entropy;

/// Tolerance on the lower bound `S ≥ S_{r,β}`.
pub const LOWER_TOL: f64 = 1e-8;

/// A field value together with the node it was taken at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeValue {
    pub value: f64,
    pub node: usize,
    pub ix: i64,
    pub iy: i64,
    pub x: f64,
    pub y: f64,
}

impl NodeValue {
    pub fn at(grid: &Grid2D, node: usize, value: f64) -> Self {
        let n = grid.node(node);
        Self {
            value,
            node,
            ix: n.ix,
            iy: n.iy,
            x: n.x,
            y: n.y,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropySummary {
    pub r: usize,
    pub beta: f64,
    pub margin: f64,
    pub region_size: usize,
    pub min: NodeValue,
    pub max: NodeValue,
    /// `S_{r,β}` of the λ-ensemble.
    pub baseline: f64,
    pub log_r: f64,
    /// `min S - S_{r,β}`
    pub lower_margin: f64,
    /// `log r - max S`
    pub upper_margin: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// Region nodes with `S < S_{r,β} - 1e-8`.
    pub lower_violations: usize,
    /// Farthest violating node from the nearest zero of `q`, if any.
    pub farthest_violation_from_zero: Option<f64>,
    pub extremal: Option<ExtremalCase>,
    /// `max |Σ p_j - 1|` over all nodes.
    pub normalization_error: f64,
}

impl EntropySummary {
    /// Both bounds hold, except that the upper bound is attained (not strict)
    /// in the flat case.
    pub fn holds(&self) -> bool {
        self.lower_holds && (self.upper_holds || self.extremal == Some(ExtremalCase::Flat))
    }
}

#[derive(Debug, Clone)]
pub struct EntropyField {
    pub beta: f64,
    pub grid: Grid2D,
    /// `probs[j][node]`, `j = 0, …, r-1`.
    pub probs: Vec<Vec<f64>>,
    pub entropy: Vec<f64>,
    pub summary: EntropySummary,
}

impl EntropyField {
    /// Minimum of `S` over the `(2 half + 1)²` node patch around `(x, y)`.
    pub fn patch_min(&self, x: f64, y: f64, half: i64) -> Result<NodeValue> {
        let patch = self.grid.patch(x, y, half)?;
        let k = patch
            .into_iter()
            .min_by(|&a, &b| self.entropy[a].total_cmp(&self.entropy[b]))
            .expect("patch is never empty");
        Ok(NodeValue::at(&self.grid, k, self.entropy[k]))
    }
}

/// `p_j = vol(H_j)^β / Σ_k vol(H_k)^β` in log space, dropping `j = 0`
/// wherever `vol(H_0) = 0`, and `S = -Σ p_j log p_j`.
///
/// `zeros` are the zeros of `q` (used only to locate violations).
pub fn entropy_field(
    m: &MetricFields,
    beta: f64,
    margin: f64,
    zeros: &[(f64, f64)],
) -> Result<EntropyField> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "beta must be a nonzero real number, got {beta}"
        )));
    }
    let r = m.r;
    let nodes = m.grid.node_count();
    let per_node: Vec<(Vec<f64>, f64)> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let logs: Vec<f64> = (0..r)
                .map(|j| {
                    let l = m.log_density[j][k];
                    if l == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        beta * l
                    }
                })
                .collect();
            let lse = log_sum_exp(&logs);
            let p: Vec<f64> = logs.iter().map(|l| (l - lse).exp()).collect();
            let s = entropy_of(&p);
            (p, s)
        })
        .collect();
    let mut probs = vec![vec![0.0; nodes]; r];
    let mut entropy = vec![0.0; nodes];
    let mut normalization_error = 0.0f64;
    for (k, (p, s)) in per_node.into_iter().enumerate() {
        normalization_error = normalization_error.max((crate::numeric::sum(p.iter().copied()) - 1.0).abs());
        for (j, v) in p.into_iter().enumerate() {
            probs[j][k] = v;
        }
        entropy[k] = s;
    }

    let region = m.grid.test_region(margin);
    if region.is_empty() {
        return Err(Error::InvalidInput(format!("no interior nodes at distance {margin}")));
    }
    let pick = |better: fn(f64, f64) -> bool| {
        let k = region
            .iter()
            .copied()
            .reduce(|a, b| if better(entropy[b], entropy[a]) { b } else { a })
            .expect("region is not empty");
        NodeValue::at(&m.grid, k, entropy[k])
    };
    let min = pick(|a, b| a < b);
    let max = pick(|a, b| a > b);
    let baseline = baseline_entropy(r, beta)?;
    let log_r = (r as f64).ln();
    let violating: Vec<usize> = region
        .iter()
        .copied()
        .filter(|&k| entropy[k] < baseline - LOWER_TOL)
        .collect();
    let farthest = violating
        .iter()
        .map(|&k| {
            let n = m.grid.node(k);
            zeros
                .iter()
                .map(|(a, b)| (n.x - a).hypot(n.y - b))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(f64::max);
    let summary = EntropySummary {
        r,
        beta,
        margin,
        region_size: region.len(),
        min,
        max,
        baseline,
        log_r,
        lower_margin: min.value - baseline,
        upper_margin: log_r - max.value,
        lower_holds: min.value >= baseline - LOWER_TOL,
        upper_holds: max.value < log_r,
        lower_violations: violating.len(),
        farthest_violation_from_zero: farthest,
        extremal: detect_extremal(m, &region),
        normalization_error,
    };
    Ok(EntropyField {
        beta,
        grid: m.grid.clone(),
        probs,
        entropy,
        summary,
    })
}
