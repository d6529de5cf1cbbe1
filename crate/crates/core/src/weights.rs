//! Polynomial r-differentials `q`, their weights `φ_q = (1/r) log|q|²`,
//! sampling on grids, and the mollified family `φ_ε`.
//!
//! The flat reference metric is the constant 1 in the global coordinate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// `q(z) = c · Π (z - a_i)^{m_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RDifferentialRepr", into = "RDifferentialRepr")]
pub struct RDifferential {
    rank: usize,
    leading: Complex64,
    zeros: Vec<(Complex64, u32)>,
}

/// Config-file form: `{rank, leading: [re, im], zeros: [[re, im, m], ...]}`.
#[derive(Serialize, Deserialize)]
struct RDifferentialRepr {
    rank: usize,
    leading: [f64; 2],
    #[serde(default)]
    zeros: Vec<(f64, f64, u32)>,
}

impl TryFrom<RDifferentialRepr> for RDifferential {
    type Error = Error;

    fn try_from(r: RDifferentialRepr) -> Result<Self> {
        RDifferential::new(
            r.rank,
            Complex64::new(r.leading[0], r.leading[1]),
            r.zeros
                .into_iter()
                .map(|(re, im, m)| (Complex64::new(re, im), m))
                .collect(),
        )
    }
}

impl From<RDifferential> for RDifferentialRepr {
    fn from(q: RDifferential) -> Self {
        Self {
            rank: q.rank,
            leading: [q.leading.re, q.leading.im],
            zeros: q.zeros.iter().map(|(a, m)| (a.re, a.im, *m)).collect(),
        }
    }
}

impl RDifferential {
    pub fn new(rank: usize, leading: Complex64, zeros: Vec<(Complex64, u32)>) -> Result<Self> {
        if rank < 2 {
            return Err(Error::InvalidInput(format!("rank r = {rank} < 2")));
        }
        if !(leading.norm() > 0.0) || !leading.is_finite() {
            return Err(Error::InvalidInput(format!(
                "leading coefficient {leading} must be finite and nonzero"
            )));
        }
        if let Some((a, m)) = zeros.iter().find(|(a, m)| *m == 0 || !a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "zero at {a} with multiplicity {m}"
            )));
        }
        Ok(Self {
            rank,
            leading,
            zeros,
        })
    }

    /// The constant differential `q ≡ c`.
    pub fn constant(rank: usize, c: f64) -> Result<Self> {
        Self::new(rank, Complex64::new(c, 0.0), Vec::new())
    }

    /// Monic polynomial with simple or repeated zeros `(re, im, m)`.
    pub fn monic(rank: usize, zeros: &[(f64, f64, u32)]) -> Result<Self> {
        Self::new(
            rank,
            Complex64::new(1.0, 0.0),
            zeros
                .iter()
                .map(|&(re, im, m)| (Complex64::new(re, im), m))
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn leading(&self) -> Complex64 {
        self.leading
    }

    pub fn zeros(&self) -> &[(Complex64, u32)] {
        &self.zeros
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.leading, |acc, (a, m)| acc * (z - a).powu(*m))
    }

    /// `|q(z)|²`, evaluated as a product of moduli.
    pub fn abs2(&self, z: Complex64) -> f64 {
        self.zeros
            .iter()
            .fold(self.leading.norm_sqr(), |acc, (a, m)| {
                acc * (z - a).norm_sqr().powi(*m as i32)
            })
    }

    /// `log|q(z)|²`; `-inf` exactly at the zeros.
    pub fn log_abs2(&self, z: Complex64) -> f64 {
        let mut total = 2.0 * self.leading.norm().ln();
        for (a, m) in &self.zeros {
            let d = (z - a).norm();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            total += 2.0 * *m as f64 * d.ln();
        }
        total
    }

    /// `t^r q`.
    pub fn rescaled(&self, t: Complex64) -> Self {
        Self {
            leading: self.leading * t.powu(self.rank as u32),
            ..self.clone()
        }
    }

    /// `t q`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            leading: self.leading * t,
            ..self.clone()
        }
    }

    fn nearest_zero_distance(&self, z: Complex64) -> f64 {
        self.zeros
            .iter()
            .map(|(a, _)| (z - a).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `φ_q(z) = (1/r) log|q(z)|²`.
pub fn phi_q(q: &RDifferential, z: Complex64) -> f64 {
    q.log_abs2(z) / q.rank as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFlag {
    Finite,
    NegInfinity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    Analytic(RDifferential),
    Sampled,
}

/// `φ` at every node of a grid (interior and boundary).
#[derive(Debug, Clone)]
pub struct WeightField {
    pub grid: Grid2D,
    pub rank: usize,
    pub values: Vec<f64>,
    pub flags: Vec<NodeFlag>,
    pub source: WeightSource,
}

impl WeightField {
    /// Wraps externally sampled values; `-inf` entries are flagged, other
    /// non-finite values are rejected.
    pub fn from_values(grid: Grid2D, rank: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        let flags = values
            .iter()
            .map(|&v| match v {
                v if v.is_finite() => Ok(NodeFlag::Finite),
                f64::NEG_INFINITY => Ok(NodeFlag::NegInfinity),
                v => Err(Error::InvalidInput(format!("weight value {v}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            rank,
            values,
            flags,
            source: WeightSource::Sampled,
        })
    }

    /// Five-point Laplacian at interior nodes whose stencil is finite.
    pub fn laplacian(&self) -> Vec<Option<f64>> {
        let h2 = self.grid.h() * self.grid.h();
        (0..self.grid.n_interior())
            .map(|k| {
                let nb = self.grid.neighbors(k);
                let c = self.values[k];
                let s: f64 = nb.iter().map(|&j| self.values[j]).sum();
                let v = (s - 4.0 * c) / h2;
                v.is_finite().then_some(v)
            })
            .collect()
    }

    /// Most negative discrete Laplacian over finite interior nodes farther
    /// than `exclusion` from every zero (analytic sources) or over all finite
    /// stencils (sampled sources); zero if none is negative.
    pub fn subharmonicity_defect(&self, exclusion: f64) -> f64 {
        let lap = self.laplacian();
        lap.iter()
            .enumerate()
            .filter_map(|(k, v)| {
                let v = (*v)?;
                if let WeightSource::Analytic(q) = &self.source {
                    let n = self.grid.node(k);
                    if q.nearest_zero_distance(Complex64::new(n.x, n.y)) <= exclusion {
                        return None;
                    }
                }
                Some(v)
            })
            .fold(0.0f64, |acc, v| acc.max(-v))
    }
}

/// Samples `φ_q` at every node. Fails if a zero of `q` sits on a node.
pub fn sample_weight(q: &RDifferential, grid: &Grid2D) -> Result<WeightField> {
    let tol = 1e-12 * grid.h();
    for n in grid.nodes() {
        let z = Complex64::new(n.x, n.y);
        if let Some((a, _)) = q.zeros.iter().find(|(a, _)| (z - a).norm() <= tol) {
            return Err(Error::ZeroOnNode { re: a.re, im: a.im });
        }
    }
    let values: Vec<f64> = grid
        .nodes()
        .par_iter()
        .map(|n| phi_q(q, Complex64::new(n.x, n.y)))
        .collect();
    Ok(WeightField {
        grid: grid.clone(),
        rank: q.rank,
        flags: vec![NodeFlag::Finite; values.len()],
        values,
        source: WeightSource::Analytic(q.clone()),
    })
}

/// Radial profile of the bump kernel `(1 - |y|²/ε²)³`: the fraction of mass
/// within radius `s ε` is `1 - (1 - s²)⁴`.
fn kernel(rho2_over_eps2: f64) -> f64 {
    if rho2_over_eps2 >= 1.0 {
        0.0
    } else {
        (1.0 - rho2_over_eps2).powi(3)
    }
}

/// `∫ log|x - y| K_ε(y) dy` for `|x| = d`, in closed form.
///
/// The circle mean of `log|x - y|` over `|y| = t` is `max(log d, log t)`, so
/// the convolution reduces to a one-dimensional integral against the radial
/// density `8 s (1 - s²)³` on `[0, 1]`.
pub fn mollified_log_distance(d: f64, eps: f64) -> f64 {
    if d >= eps {
        return d.ln();
    }
    let a2 = (d / eps) * (d / eps);
    let w = (1.0 - a2).powi(4);
    // G(v) = ∫ (1 - v)³ log v dv, term by term with ∫ v^n log v
    let coeffs = [1.0, -3.0, 3.0, -1.0];
    let g = |v: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let p = (n + 1) as f64;
                let vp = v.powi(n as i32 + 1);
                let log_term = if v > 0.0 { vp * v.ln() / p } else { 0.0 };
                c * (log_term - vp / (p * p))
            })
            .sum()
    };
    let tail = 2.0 * (g(1.0) - g(a2));
    let inner = if a2 > 0.0 { d.ln() * (1.0 - w) } else { 0.0 };
    inner + eps.ln() * w + tail
}

#[derive(Debug, Clone)]
pub struct MollifiedWeight {
    pub base: WeightField,
    pub epsilon: f64,
    pub values: Vec<f64>,
}

impl MollifiedWeight {
    /// The mollified values as a sampled weight field on the same grid.
    pub fn to_field(&self) -> WeightField {
        WeightField {
            grid: self.base.grid.clone(),
            rank: self.base.rank,
            values: self.values.clone(),
            flags: vec![NodeFlag::Finite; self.values.len()],
            source: WeightSource::Sampled,
        }
    }
}

/// `φ_q * K_ε` evaluated at a point.
pub fn mollified_phi(q: &RDifferential, z: Complex64, eps: f64) -> f64 {
    let r = q.rank as f64;
    let mut total = 2.0 * q.leading.norm().ln();
    for (a, m) in &q.zeros {
        total += 2.0 * *m as f64 * mollified_log_distance((z - a).norm(), eps);
    }
    total / r
}

/// Convolves `w` with the bump kernel of radius `epsilon`.
///
/// Analytic fields are convolved exactly; sampled fields use the discrete
/// kernel normalized to unit mass over the nodes it covers.
pub fn mollify(w: &WeightField, epsilon: f64) -> Result<MollifiedWeight> {
    let h = w.grid.h();
    if !(epsilon >= 2.0 * h) || !epsilon.is_finite() {
        return Err(Error::RadiusTooSmall {
            epsilon,
            min: 2.0 * h,
        });
    }
    let values: Vec<f64> = match &w.source {
        WeightSource::Analytic(q) => w
            .grid
            .nodes()
            .par_iter()
            .map(|n| mollified_phi(q, Complex64::new(n.x, n.y), epsilon))
            .collect(),
        WeightSource::Sampled => {
            if w.flags.contains(&NodeFlag::NegInfinity) {
                return Err(Error::InvalidInput(
                    "discrete mollification needs a finite field; mollify the differential instead"
                        .into(),
                ));
            }
            let reach = (epsilon / h).ceil() as i64;
            let grid = &w.grid;
            grid.nodes()
                .par_iter()
                .map(|n| {
                    let (mut acc, mut mass) = (0.0, 0.0);
                    for dy in -reach..=reach {
                        for dx in -reach..=reach {
                            let rho2 = ((dx * dx + dy * dy) as f64) * h * h / (epsilon * epsilon);
                            let k = kernel(rho2);
                            if k == 0.0 {
                                continue;
                            }
                            if let Some(j) = grid.index_of(n.ix + dx, n.iy + dy) {
                                acc += k * w.values[j];
                                mass += k;
                            }
                        }
                    }
                    acc / mass
                })
                .collect()
        }
    };
    Ok(MollifiedWeight {
        base: w.clone(),
        epsilon,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxMass {
    pub value: f64,
    /// `4π m_i / r`
    pub expected: f64,
    pub matches: bool,
    pub samples: usize,
}

/// Outward flux of `∇φ_q` through the circle of radius `rho` about zero `i`.
pub fn flux_mass(q: &RDifferential, i: usize, rho: f64) -> Result<FluxMass> {
    if q.zeros.is_empty() {
        return Err(Error::NoZeros);
    }
    let (center, mult) = *q.zeros.get(i).ok_or_else(|| {
        Error::InvalidInput(format!("zero index {i} out of range ({} zeros)", q.zeros.len()))
    })?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!("radius {rho}")));
    }
    for (k, (a, _)) in q.zeros.iter().enumerate() {
        if k == i {
            continue;
        }
        let d = (a - center).norm();
        if d <= rho * (1.0 + 1e-9) {
            return Err(Error::CircleNotIsolated {
                index: i,
                radius: rho,
                reason: format!("zero {k} at distance {d} lies on or inside the circle"),
            });
        }
    }
    let r = q.rank as f64;
    // ∂_n φ on the circle; the trapezoid rule is spectrally accurate for
    // this periodic integrand
    let integrate = |n: usize| -> f64 {
        let dtheta = std::f64::consts::TAU / n as f64;
        let terms = (0..n).map(|k| {
            let normal = Complex64::from_polar(1.0, k as f64 * dtheta);
            let z = center + normal * rho;
            let grad: Complex64 = q
                .zeros
                .iter()
                .map(|(a, m)| (z - a) / (z - a).norm_sqr() * (2.0 * *m as f64 / r))
                .sum();
            (grad.re * normal.re + grad.im * normal.im) * rho * dtheta
        });
        crate::numeric::sum(terms)
    };
    let mut n = 64;
    let mut prev = integrate(n);
    loop {
        n *= 2;
        let next = integrate(n);
        if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) {
            let expected = 4.0 * std::f64::consts::PI * mult as f64 / r;
            return Ok(FluxMass {
                value: next,
                expected,
                matches: (next - expected).abs() <= 1e-6,
                samples: n,
            });
        }
        if n >= 1 << 22 {
            return Err(Error::Quadrature(format!(
                "flux integral did not settle (last {next}, previous {prev})"
            )));
        }
        prev = next;
    }
}

/// A weight as it enters the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSpec {
    Differential { q: RDifferential },
    /// `φ_q` convolved with the bump kernel of radius `epsilon`.
    Mollified { q: RDifferential, epsilon: f64 },
    /// The distinguished `φ ≡ -∞` token (`q ≡ 0`).
    MinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightClass {
    Flat,
    MinusInfinity,
    Generic,
}

pub fn classify_weight(w: &WeightSpec) -> WeightClass {
    match w {
        WeightSpec::MinusInfinity => WeightClass::MinusInfinity,
        WeightSpec::Differential { q } | WeightSpec::Mollified { q, .. } => {
            if q.zeros.is_empty() {
                WeightClass::Flat
            } else {
                WeightClass::Generic
            }
        }
    }
}

/// Per-node weight data used by the solver.
#[derive(Debug, Clone)]
pub struct NodeWeights {
    /// `φ`, `-inf` for the token.
    pub phi: Vec<f64>,
    /// `|q|²` (or `e^{r φ_ε}` for mollified weights); zero for the token.
    pub q2: Vec<f64>,
}

impl WeightSpec {
    pub fn differential(&self) -> Option<&RDifferential> {
        match self {
            WeightSpec::Differential { q } | WeightSpec::Mollified { q, .. } => Some(q),
            WeightSpec::MinusInfinity => None,
        }
    }

    /// Same weight with `q` replaced by `t q`.
    pub fn scaled(&self, t: f64) -> Self {
        match self {
            WeightSpec::Differential { q } => WeightSpec::Differential { q: q.scaled(t) },
            WeightSpec::Mollified { q, epsilon } => WeightSpec::Mollified {
                q: q.scaled(t),
                epsilon: *epsilon,
            },
            WeightSpec::MinusInfinity => WeightSpec::MinusInfinity,
        }
    }

    pub fn at_nodes(&self, grid: &Grid2D, r: usize) -> Result<NodeWeights> {
        if let Some(q) = self.differential() {
            if q.rank != r {
                return Err(Error::InvalidInput(format!(
                    "differential has rank {} but the system has rank {r}",
                    q.rank
                )));
            }
        }
        match self {
            WeightSpec::Differential { q } => {
                let field = sample_weight(q, grid)?;
                let q2 = grid
                    .nodes()
                    .iter()
                    .map(|n| q.abs2(Complex64::new(n.x, n.y)))
                    .collect();
                Ok(NodeWeights {
                    phi: field.values,
                    q2,
                })
            }
            WeightSpec::Mollified { q, epsilon } => {
                let m = mollify(&sample_weight(q, grid)?, *epsilon)?;
                let q2 = m.values.iter().map(|v| (r as f64 * v).exp()).collect();
                Ok(NodeWeights { phi: m.values, q2 })
            }
            WeightSpec::MinusInfinity => Ok(NodeWeights {
                phi: vec![f64::NEG_INFINITY; grid.node_count()],
                q2: vec![0.0; grid.node_count()],
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, GridSpec};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_examples() {
        let one = RDifferential::constant(3, 1.0).unwrap();
        assert_eq!(phi_q(&one, c(0.3, -2.0)), 0.0);
        let z = RDifferential::monic(2, &[(0.0, 0.0, 1)]).unwrap();
        assert_relative_eq!(phi_q(&z, c(0.5, 0.0)), 0.5f64.ln(), max_relative = 1e-15);
        assert_eq!(phi_q(&z, c(0.0, 0.0)), f64::NEG_INFINITY);
        let z2 = RDifferential::monic(4, &[(0.0, 0.0, 2)]).unwrap();
        assert_relative_eq!(phi_q(&z2, c(std::f64::consts::E, 0.0)), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_differentials() {
        assert!(RDifferential::constant(1, 1.0).is_err());
        assert!(RDifferential::constant(3, 0.0).is_err());
        assert!(RDifferential::monic(3, &[(0.0, 0.0, 0)]).is_err());
    }

    #[test]
    fn config_form_round_trips() {
        let json = r#"{"rank":4,"leading":[2.0,-1.0],"zeros":[[0.5,0.0,1],[-0.5,0.0,2]]}"#;
        let q: RDifferential = serde_json::from_str(json).unwrap();
        assert_eq!(q.rank(), 4);
        assert_eq!(q.zeros()[1], (c(-0.5, 0.0), 2));
        let back = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<RDifferential>(&back).unwrap(), q);
        assert!(serde_json::from_str::<RDifferential>(r#"{"rank":3,"leading":[0,0]}"#).is_err());
    }

    #[test]
    fn eval_and_abs2_agree() {
        let q = RDifferential::new(3, c(1.5, 0.5), vec![(c(0.2, 0.1), 2), (c(-0.4, 0.3), 1)])
            .unwrap();
        let z = c(0.7, -0.2);
        assert_relative_eq!(q.eval(z).norm_sqr(), q.abs2(z), max_relative = 1e-13);
        assert_relative_eq!(q.abs2(z).ln(), q.log_abs2(z), max_relative = 1e-13);
    }

    #[test]
    fn rescaling_shifts_phi_by_two_log_t() {
        let q = RDifferential::monic(5, &[(0.1, 0.2, 1), (-0.3, 0.0, 3)]).unwrap();
        let t = c(0.6, 1.1);
        let qt = q.rescaled(t);
        for z in [c(0.4, 0.4), c(-1.0, 0.2), c(0.0, -0.7)] {
            assert_relative_eq!(
                phi_q(&qt, z),
                phi_q(&q, z) + 2.0 * t.norm().ln(),
                max_relative = 1e-14,
                epsilon = 1e-14
            );
        }
    }

    fn disc_grid(h: f64) -> Grid2D {
        Grid2D::new(&GridSpec::new(Domain::Disc { radius: 0.9 }, h)).unwrap()
    }

    #[test]
    fn sampling_examples() {
        let g = disc_grid(1.0 / 32.0);
        let w = sample_weight(&RDifferential::constant(3, 1.0).unwrap(), &g).unwrap();
        assert!(w.values.iter().all(|&v| v == 0.0));
        let w = sample_weight(&RDifferential::monic(3, &[(0.0, 0.0, 1)]).unwrap(), &g).unwrap();
        assert!(w.values.iter().all(|v| v.is_finite()));
        assert!(w.flags.iter().all(|f| *f == NodeFlag::Finite));
        let on_node = g.node(10);
        let bad = RDifferential::monic(3, &[(on_node.x, on_node.y, 1)]).unwrap();
        assert!(matches!(sample_weight(&bad, &g), Err(Error::ZeroOnNode { .. })));
    }

    #[test]
    fn sampled_laplacian_is_second_order_away_from_zero() {
        let q = RDifferential::monic(4, &[(0.0, 0.0, 2)]).unwrap();
        let mut prev: Option<f64> = None;
        for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
            let w = sample_weight(&q, &disc_grid(h)).unwrap();
            let lap = w.laplacian();
            let worst = (0..w.grid.n_interior())
                .filter(|&k| {
                    let n = w.grid.node(k);
                    n.x.hypot(n.y) > 0.3
                })
                .map(|k| lap[k].unwrap().abs())
                .fold(0.0, f64::max);
            let constant = worst / (h * h);
            if let Some(p) = prev {
                // the measured C settles as h shrinks
                assert!((constant / p - 1.0).abs() < 0.2, "C = {constant}, previous {p}");
            }
            prev = Some(constant);
        }
    }

    #[test]
    fn mollified_log_distance_properties() {
        // continuity at the kernel edge and the closed value at the centre
        assert_relative_eq!(mollified_log_distance(0.1, 0.1), 0.1f64.ln());
        assert_relative_eq!(
            mollified_log_distance(0.0, 0.2),
            0.2f64.ln() - 25.0 / 24.0,
            max_relative = 1e-14
        );
        // against a brute-force radial quadrature
        for (d, eps) in [(0.03f64, 0.1f64), (0.07, 0.1), (0.0001, 0.05)] {
            let n = 200_000;
            let ds = 1.0 / n as f64;
            let brute: f64 = (0..n)
                .map(|i| {
                    let s = (i as f64 + 0.5) * ds;
                    8.0 * s * (1.0 - s * s).powi(3) * d.ln().max((eps * s).ln()) * ds
                })
                .sum();
            assert_relative_eq!(mollified_log_distance(d, eps), brute, max_relative = 1e-6);
        }
        // monotone in epsilon, never below log d
        for d in [0.0, 0.01, 0.05, 0.2] {
            let vals: Vec<f64> =
                [0.4, 0.2, 0.1, 0.05].iter().map(|&e| mollified_log_distance(d, e)).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]));
            assert!(vals.iter().all(|&v| v >= d.ln()));
        }
    }

    #[test]
    fn mollify_examples() {
        let g = disc_grid(1.0 / 32.0);
        let h = g.h();
        let zero = sample_weight(&RDifferential::constant(3, 1.0).unwrap(), &g).unwrap();
        let m = mollify(&zero, 4.0 * h).unwrap();
        assert!(m.values.iter().all(|v| v.abs() < 1e-15));
        let q = RDifferential::monic(3, &[(0.0, 0.0, 1)]).unwrap();
        let w = sample_weight(&q, &g).unwrap();
        assert!(matches!(mollify(&w, 1.5 * h), Err(Error::RadiusTooSmall { .. })));
        let fams: Vec<_> = [8.0, 4.0, 2.0]
            .iter()
            .map(|&k| mollify(&w, k * h).unwrap())
            .collect();
        assert!(phi_q(&q, c(0.0, 0.0)) == f64::NEG_INFINITY);
        assert!(mollified_phi(&q, c(0.0, 0.0), 2.0 * h).is_finite());
        for k in 0..g.node_count() {
            assert!(fams[1].values[k] <= fams[0].values[k] + 1e-10);
            assert!(fams[2].values[k] <= fams[1].values[k] + 1e-10);
            assert!(fams[2].values[k] >= w.values[k]);
        }
        // far from the zero the harmonic weight is reproduced exactly
        let far = (0..g.node_count())
            .filter(|&k| g.node(k).x.hypot(g.node(k).y) > 8.0 * h)
            .map(|k| (fams[0].values[k] - w.values[k]).abs())
            .fold(0.0, f64::max);
        assert!(far < 1e-14);
    }

    #[test]
    fn discrete_mollification_of_sampled_field() {
        let g = disc_grid(1.0 / 32.0);
        let values: Vec<f64> = g.nodes().iter().map(|n| n.x * n.x - n.y * n.y + 0.5).collect();
        let w = WeightField::from_values(g.clone(), 3, values.clone()).unwrap();
        let m = mollify(&w, 3.0 * g.h()).unwrap();
        // a symmetric kernel reproduces harmonic quadratics away from the edge
        for k in g.test_region(4.0 * g.h()) {
            assert!((m.values[k] - values[k]).abs() < 1e-12);
        }
        let mut bad = values;
        bad[0] = f64::NEG_INFINITY;
        let w = WeightField::from_values(g, 3, bad).unwrap();
        assert_eq!(w.flags[0], NodeFlag::NegInfinity);
        assert!(mollify(&w, 0.1).is_err());
    }

    #[test]
    fn flux_examples() {
        let z = RDifferential::monic(2, &[(0.0, 0.0, 1)]).unwrap();
        let f = flux_mass(&z, 0, 0.3).unwrap();
        assert!((f.value - std::f64::consts::TAU).abs() < 1e-6 && f.matches);
        let z2 = RDifferential::monic(2, &[(0.0, 0.0, 2)]).unwrap();
        let f = flux_mass(&z2, 0, 0.3).unwrap();
        assert!((f.value - 4.0 * std::f64::consts::PI).abs() < 1e-6);
        assert!(matches!(
            flux_mass(&RDifferential::constant(2, 1.0).unwrap(), 0, 0.3),
            Err(Error::NoZeros)
        ));
        let two = RDifferential::monic(3, &[(0.0, 0.0, 1), (0.5, 0.0, 2)]).unwrap();
        assert!(matches!(flux_mass(&two, 0, 0.6), Err(Error::CircleNotIsolated { .. })));
        let a = flux_mass(&two, 1, 0.2).unwrap();
        let b = flux_mass(&two, 1, 0.4).unwrap();
        assert!((a.value - b.value).abs() < 1e-6);
        assert!((a.value - 8.0 * std::f64::consts::PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn classification() {
        let flat = WeightSpec::Differential {
            q: RDifferential::constant(3, 2.0).unwrap(),
        };
        assert_eq!(classify_weight(&flat), WeightClass::Flat);
        assert_eq!(classify_weight(&WeightSpec::MinusInfinity), WeightClass::MinusInfinity);
        let generic = WeightSpec::Differential {
            q: RDifferential::monic(3, &[(0.0, 0.0, 1), (1.0, 0.0, 1)]).unwrap(),
        };
        assert_eq!(classify_weight(&generic), WeightClass::Generic);
    }

    #[test]
    fn weight_spec_config_form() {
        let json = r#"{"kind":"mollified","q":{"rank":3,"leading":[1,0],"zeros":[[0,0,1]]},"epsilon":0.1}"#;
        let w: WeightSpec = serde_json::from_str(json).unwrap();
        assert!(matches!(w, WeightSpec::Mollified { epsilon, .. } if epsilon == 0.1));
        let t: WeightSpec = serde_json::from_str(r#"{"kind":"minus-infinity"}"#).unwrap();
        assert_eq!(t, WeightSpec::MinusInfinity);
    }
}
