//! Pointwise ratio bounds and the sup-quantity chain for adjacent metrics.
//!
//! With `n = ⌊r/2⌋`, `δ = r - 2n`, `σ_j = u_{j-1} - u_j` (`j = 1..n`) and
//! `σ'_j = u_{j+1} - u_j` (`j = 1..n-1`), the sups `M_j = sup e^{σ_j}` and
//! `M'_j = sup e^{σ'_j}` are taken over interior nodes at distance at least
//! the margin from the boundary.

use serde::Serialize;

use super::entropy::NodeValue;
use super::MetricFields;
use crate::spectrum::LambdaSpectrum;
use crate::weights::WeightClass;

/// Default interior margin in units of `h`.
pub const DEFAULT_MARGIN_CELLS: f64 = 8.0;
/// Slack below zero still counted as holding (rounding).
pub const SLACK_TOL: f64 = 1e-12;
/// Tolerance for recognizing a flat solution.
const FLAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremalCase {
    Flat,
    Hyperbolic,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupQuantity {
    pub name: String,
    pub j: usize,
    pub value: f64,
    pub at: NodeValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub j: usize,
    pub formula: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` (for identities, `-|rhs - lhs|`).
    pub slack: f64,
    /// Whether the claim is a strict inequality.
    pub strict: bool,
    pub holds: bool,
    /// Worst node, for pointwise checks.
    pub at: Option<NodeValue>,
}

impl InequalityCheck {
    fn new(name: &str, j: usize, formula: String, lhs: f64, rhs: f64, strict: bool) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            j,
            formula,
            lhs,
            rhs,
            slack,
            strict,
            holds: if strict { slack > 0.0 } else { slack >= -SLACK_TOL },
            at: None,
        }
    }

    fn identity(name: &str, j: usize, formula: String, lhs: f64, rhs: f64) -> Self {
        let mut c = Self::new(name, j, formula, lhs, rhs, false);
        c.slack = -(rhs - lhs).abs();
        c.holds = c.slack >= -SLACK_TOL;
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub r: usize,
    pub n: usize,
    pub delta: usize,
    pub margin: f64,
    pub region_size: usize,
    pub extremal: Option<ExtremalCase>,
    pub notes: Vec<String>,
    pub sups: Vec<SupQuantity>,
    /// Named derived quantities (`B_j`, `B'_j`, `d'_j`, `D'_j`); non-finite
    /// values serialize as `null`.
    pub derived: Vec<(String, f64)>,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self, name: &str, j: usize) -> Option<&SupQuantity> {
        self.sups.iter().find(|s| s.name == name && s.j == j)
    }
}

/// `e^{σ_j}` at every node, `j = 1..=n`.
pub fn sigma_field(m: &MetricFields, j: usize) -> Vec<f64> {
    assert!(j >= 1 && j < m.r, "sigma index {j} out of range");
    let (a, b) = (&m.log_density[j - 1], &m.log_density[j]);
    a.iter().zip(b).map(|(x, y)| (x - y).exp()).collect()
}

/// `e^{σ'_j}` at every node, `j = 1..n-1`.
pub fn sigma_prime_field(m: &MetricFields, j: usize) -> Vec<f64> {
    assert!(j >= 1 && j + 1 < m.r, "sigma' index {j} out of range");
    let (a, b) = (&m.log_density[j + 1], &m.log_density[j]);
    a.iter().zip(b).map(|(x, y)| (x - y).exp()).collect()
}

pub(crate) fn detect_extremal(m: &MetricFields, region: &[usize]) -> Option<ExtremalCase> {
    if m.weight_class == WeightClass::MinusInfinity {
        return Some(ExtremalCase::Hyperbolic);
    }
    let flat = (1..=m.n.max(1)).all(|j| {
        let f = sigma_field(m, j);
        region.iter().all(|&k| (f[k] - 1.0).abs() <= FLAT_TOL)
    });
    flat.then_some(ExtremalCase::Flat)
}

fn extreme(m: &MetricFields, field: &[f64], region: &[usize], max: bool) -> NodeValue {
    let k = region
        .iter()
        .copied()
        .reduce(|a, b| {
            let better = if max { field[b] > field[a] } else { field[b] < field[a] };
            if better {
                b
            } else {
                a
            }
        })
        .expect("test region is empty");
    NodeValue::at(&m.grid, k, field[k])
}

fn lambda(r: usize) -> LambdaSpectrum {
    LambdaSpectrum::closed_form(r).expect("rank is at least 2")
}

fn base_report(m: &MetricFields, margin: f64) -> (InequalityReport, Vec<usize>) {
    let region = m.grid.test_region(margin);
    assert!(!region.is_empty(), "no interior nodes at distance {margin} from the boundary");
    let extremal = detect_extremal(m, &region);
    let mut notes = Vec::new();
    match extremal {
        Some(ExtremalCase::Flat) => notes.push(
            "flat case: upper bounds are attained, strictness is not expected".into(),
        ),
        Some(ExtremalCase::Hyperbolic) => notes.push(
            "hyperbolic extremal case: lower bounds are attained, strictness is not expected".into(),
        ),
        None => {}
    }
    (
        InequalityReport {
            r: m.r,
            n: m.n,
            delta: m.delta,
            margin,
            region_size: region.len(),
            extremal,
            notes,
            sups: Vec::new(),
            derived: Vec::new(),
            checks: Vec::new(),
        },
        region,
    )
}

/// Pointwise bounds `λ_{j-1}/λ_j < e^{σ_j} < 1` (`2 ≤ j ≤ n`),
/// `e^{u_0 - u_1} ≤ 1`, and `e^{σ'_j} < λ_{j+1}/λ_j` (`1 ≤ j ≤ n-1`), over
/// interior nodes at distance `margin` or more from the boundary.
///
/// Strict bounds are relaxed to non-strict on the extremal side they
/// saturate (upper for flat inputs, lower for the hyperbolic one).
pub fn check_prop_inequalities(m: &MetricFields, margin: f64) -> InequalityReport {
    let (mut report, region) = base_report(m, margin);
    let lam = lambda(m.r);
    let flat = report.extremal == Some(ExtremalCase::Flat);
    let hyperbolic = report.extremal == Some(ExtremalCase::Hyperbolic);

    let mut push = |name: &str, j: usize, formula: String, worst: NodeValue, bound: f64, upper: bool, strict: bool| {
        let (lhs, rhs) = if upper { (worst.value, bound) } else { (bound, worst.value) };
        let mut c = InequalityCheck::new(name, j, formula, lhs, rhs, strict);
        c.at = Some(worst);
        report.checks.push(c);
    };

    for j in 2..=m.n {
        let f = sigma_field(m, j);
        let lo = lam.get(j - 1) / lam.get(j);
        push(
            "sigma-lower",
            j,
            format!("λ_{}/λ_{j} < e^σ_{j}", j - 1),
            extreme(m, &f, &region, false),
            lo,
            false,
            !hyperbolic,
        );
        push(
            "sigma-upper",
            j,
            format!("e^σ_{j} < 1"),
            extreme(m, &f, &region, true),
            1.0,
            true,
            !flat,
        );
    }
    let f = sigma_field(m, 1);
    push(
        "degenerate-ratio",
        1,
        "e^(u_0 - u_1) ≤ 1".into(),
        extreme(m, &f, &region, true),
        1.0,
        true,
        false,
    );
    for j in 1..m.n {
        let f = sigma_prime_field(m, j);
        push(
            "sigma-prime-upper",
            j,
            format!("e^σ'_{j} < λ_{}/λ_{j}", j + 1),
            extreme(m, &f, &region, true),
            lam.get(j + 1) / lam.get(j),
            true,
            !hyperbolic,
        );
    }
    let observed = report
        .checks
        .iter()
        .any(|c| c.name == "degenerate-ratio" && c.slack > 0.0);
    report
        .notes
        .push(format!("observed strictness of e^(u_0 - u_1) < 1: {observed}"));
    report
}

/// Sups `M_j`, `M'_j`, the derived `B_j`, `B'_j`, `d'_j`, `D'_j`, and the
/// chain of inequalities between them.
pub fn sup_chain_check(m: &MetricFields, margin: f64) -> InequalityReport {
    let (mut report, region) = base_report(m, margin);
    let (n, delta) = (m.n, m.delta as f64);
    let lam = lambda(m.r);

    let mut big_m = vec![f64::NAN; n + 1];
    for j in 1..=n {
        let at = extreme(m, &sigma_field(m, j), &region, true);
        big_m[j] = at.value;
        report.sups.push(SupQuantity {
            name: "M".into(),
            j,
            value: at.value,
            at,
        });
    }
    let mut big_mp = vec![f64::NAN; n.max(1)];
    for j in 1..n {
        let at = extreme(m, &sigma_prime_field(m, j), &region, true);
        big_mp[j] = at.value;
        report.sups.push(SupQuantity {
            name: "M'".into(),
            j,
            value: at.value,
            at,
        });
    }
    let mm = |j: usize| big_m[j];
    let mp = |j: usize| big_mp[j];

    let b = |j: usize| -> f64 {
        if j == 1 {
            2.0 * (1.0 - 1.0 / mm(1))
        } else if j <= n {
            2.0 - 1.0 / mm(j) - mm(j - 1)
        } else {
            (2.0 - delta) * (1.0 - mm(n))
        }
    };
    // M_j B_j, written so that M_1 = 0 gives a finite product
    let mb = |j: usize| -> f64 {
        if j == 1 {
            2.0 * (mm(1) - 1.0)
        } else {
            2.0 * mm(j) - 1.0 - mm(j) * mm(j - 1)
        }
    };
    let bp = |j: usize| -> f64 {
        if j == n - 1 {
            (2.0 - delta) * (1.0 - 1.0 / mp(n - 1))
        } else if j == 0 {
            2.0 - mp(1)
        } else {
            2.0 - 1.0 / mp(j) - mp(j + 1)
        }
    };
    let mpbp = |j: usize| -> f64 {
        if j == n - 1 {
            (2.0 - delta) * (mp(n - 1) - 1.0)
        } else {
            2.0 * mp(j) - 1.0 - mp(j) * mp(j + 1)
        }
    };
    let d = |j: usize| lam.get(j + 1) / lam.get(j);
    let dd = |j: usize| -> f64 {
        if j == n - 1 {
            (2.0 - delta) * (1.0 - 1.0 / d(n - 1))
        } else if j == 0 {
            2.0 - d(1)
        } else {
            2.0 - 1.0 / d(j) - d(j + 1)
        }
    };

    for j in 1..=n + 1 {
        report.derived.push((format!("B_{j}"), b(j)));
    }
    if n >= 2 {
        for j in 0..n {
            report.derived.push((format!("B'_{j}"), bp(j)));
        }
        for j in 1..n {
            report.derived.push((format!("d'_{j}"), d(j)));
        }
        for j in 0..n {
            report.derived.push((format!("D'_{j}"), dd(j)));
        }
    }

    let checks = &mut report.checks;
    for j in 1..n {
        let jf = j as f64;
        checks.push(InequalityCheck::new(
            "m-recursion",
            j,
            format!("M_{j} ≤ 4j/(2j+1) - (2j-1)/((2j+1) M_{})", j + 1),
            mm(j),
            4.0 * jf / (2.0 * jf + 1.0) - (2.0 * jf - 1.0) / (2.0 * jf + 1.0) / mm(j + 1),
            false,
        ));
    }
    for j in 1..=n {
        checks.push(InequalityCheck::new(
            "mb-product",
            j,
            format!("M_{j} B_{j} ≤ B_{}", j + 1),
            mb(j),
            b(j + 1),
            false,
        ));
    }
    for j in 1..n.saturating_sub(1) {
        let jf = j as f64;
        let den = 2.0 * jf + 1.0 - jf * delta;
        checks.push(InequalityCheck::new(
            "mp-recursion",
            j,
            format!("M'_{} ≤ (4j-(2j-1)δ)/(2j+1-jδ) - (2j-1-(j-1)δ)/((2j+1-jδ) M'_{})", n - j, n - j - 1),
            mp(n - j),
            (4.0 * jf - (2.0 * jf - 1.0) * delta) / den
                - (2.0 * jf - 1.0 - (jf - 1.0) * delta) / den / mp(n - j - 1),
            false,
        ));
    }
    for j in 1..n {
        checks.push(InequalityCheck::new(
            "mpbp-product",
            j,
            format!("M'_{} B'_{} ≤ B'_{}", n - j, n - j, n - j - 1),
            mpbp(n - j),
            bp(n - j - 1),
            false,
        ));
    }
    for j in 1..=n {
        let jf = j as f64;
        checks.push(InequalityCheck::new(
            "m-minus-one",
            j,
            format!("M_{j} - 1 ≤ (2j-1)/2 B_{}", j + 1),
            mm(j) - 1.0,
            (2.0 * jf - 1.0) / 2.0 * b(j + 1),
            false,
        ));
    }
    for j in 1..n {
        let jf = j as f64;
        checks.push(InequalityCheck::new(
            "mp-minus-one",
            j,
            format!("M'_{} - 1 ≤ (2j-1-(j-1)δ)/(2-δ) B'_{}", n - j, n - j - 1),
            mp(n - j) - 1.0,
            (2.0 * jf - 1.0 - (jf - 1.0) * delta) / (2.0 - delta) * bp(n - j - 1),
            false,
        ));
    }
    for j in 1..=n {
        checks.push(InequalityCheck::new(
            "m-at-most-one",
            j,
            format!("M_{j} ≤ 1"),
            mm(j),
            1.0,
            false,
        ));
    }
    for j in 1..n {
        checks.push(InequalityCheck::new(
            "mp-lambda-ratio",
            j,
            format!("M'_{j} ≤ λ_{}/λ_{j}", j + 1),
            mp(j),
            d(j),
            false,
        ));
    }
    for j in 1..n {
        let jf = j as f64;
        checks.push(InequalityCheck::identity(
            "d-prime-identity",
            j,
            format!("d'_{} - 1 = (2j-1-(j-1)δ)/(2-δ) D'_{}", n - j, n - j - 1),
            d(n - j) - 1.0,
            (2.0 * jf - 1.0 - (jf - 1.0) * delta) / (2.0 - delta) * dd(n - j - 1),
        ));
    }
    report
}
