use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid ratio chain: {0}")]
    InvalidRatioChain(String),

    #[error("distribution is not sorted ascending at index {index}")]
    Unsorted { index: usize },

    #[error("entry {index} of the positive tail is zero")]
    ZeroInTail { index: usize },

    #[error("domination fails first at index {index}: Q ratio {q_ratio} > P ratio {p_ratio}")]
    NotDominated {
        index: usize,
        q_ratio: f64,
        p_ratio: f64,
    },

    #[error("finite-difference step leaves (0, 1]: s_k = {value}, h = {step}")]
    StepOutOfDomain { value: f64, step: f64 },

    #[error("divergent integral: beta = {0} <= -1")]
    DivergentIntegral(f64),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero of q at ({re}, {im}) coincides with a grid node; shift the grid offset")]
    ZeroOnNode { re: f64, im: f64 },

    #[error("mollification radius {epsilon} is below 2h = {min}")]
    RadiusTooSmall { epsilon: f64, min: f64 },

    #[error("circle of radius {radius} around zero {index} is not isolated: {reason}")]
    CircleNotIsolated {
        index: usize,
        radius: f64,
        reason: String,
    },

    #[error("q has no zeros; flux is undefined")]
    NoZeros,

    #[error("weight does not match the requested extremal solution: {0}")]
    KindMismatch(String),

    #[error("inconsistent boundary data: {0}")]
    Boundary(String),

    #[error("Newton stagnated after {iterations} iterations (best residual {residual:e})")]
    Stagnation {
        iterations: usize,
        residual: f64,
        best: Box<crate::toda::GridSolution>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("grids are not nested: {0}")]
    NotNested(String),

    #[error("integrity error in {path}: {reason}")]
    Integrity { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
