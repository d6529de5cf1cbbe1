//! Shannon entropy of finite distributions, the ratio-domination comparison
//! between two sorted distributions, and the ratio-chain parametrization of
//! sorted distributions.
//!
//! Natural logarithms throughout; `0 · log 0 = 0` by branch.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric;

/// Absolute tolerance on `Σ p = 1`.
pub const SUM_TOL: f64 = 1e-12;
/// Relative slack used when comparing adjacent-entry ratios.
pub const RATIO_TOL: f64 = 1e-12;
/// Entropy comparisons (equality cases, sign of margins).
pub const ENTROPY_TOL: f64 = 1e-12;

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite nonnegative number"
            )));
        }
        let total = numeric::sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total:.17}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total = numeric::sum(weights.iter().copied());
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Normalizes `exp(log_weights)` in log space; `-inf` entries get
    /// probability exactly zero.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let lse = numeric::log_sum_exp(log_weights);
        if !lse.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "log-partition is {lse}"
            )));
        }
        let mut probs: Vec<f64> = log_weights.iter().map(|&l| (l - lse).exp()).collect();
        // absorb the last few ulps so the sum check is tight
        let total = numeric::sum(probs.iter().copied());
        probs.iter_mut().for_each(|p| *p /= total);
        Self::new(probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::InvalidDistribution(format!(
                "point mass index {at} out of range for {n} outcomes"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Stable ascending sort; ties keep their original order. Returns the
    /// sorted distribution and the permutation (`sorted[i] = self[perm[i]]`).
    pub fn sorted_ascending(&self) -> (Distribution, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.probs.len()).collect();
        perm.sort_by(|&a, &b| self.probs[a].total_cmp(&self.probs[b]));
        let probs = perm.iter().map(|&i| self.probs[i]).collect();
        (Distribution { probs }, perm)
    }

    /// Ratios `p_j / p_{j+1}` of adjacent entries.
    pub fn adjacent_ratios(&self) -> Vec<f64> {
        self.probs.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// `-Σ p log p`, natural log, `0 log 0 = 0`.
pub fn entropy(d: &Distribution) -> f64 {
    entropy_of(d.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -numeric::sum(
        probs
            .iter()
            .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyBounds {
    pub entropy: f64,
    pub max: f64,
    pub within_bounds: bool,
    pub min_attained: bool,
    pub max_attained: bool,
    pub is_point_mass: bool,
    pub is_uniform: bool,
    /// Attainment agrees with the shape: min iff point mass, max iff uniform.
    pub pattern_matches: bool,
}

/// Checks `0 <= S <= log r` and that the extremes are attained exactly for a
/// point mass and for the uniform distribution.
pub fn entropy_bounds_check(d: &Distribution) -> EntropyBounds {
    let s = entropy(d);
    let n = d.len();
    let max = (n as f64).ln();
    let tol = ENTROPY_TOL;
    let min_attained = s.abs() <= tol;
    let max_attained = (s - max).abs() <= tol;
    let is_point_mass = d.probs().iter().any(|&p| (p - 1.0).abs() <= tol)
        && d.probs().iter().filter(|&&p| p > tol).count() == 1;
    let is_uniform = d
        .probs()
        .iter()
        .all(|&p| (p - 1.0 / n as f64).abs() <= tol);
    EntropyBounds {
        entropy: s,
        max,
        within_bounds: s >= -tol && s <= max + tol,
        min_attained,
        max_attained,
        is_point_mass,
        is_uniform,
        pattern_matches: (min_attained == is_point_mass) && (max_attained == is_uniform),
    }
}

fn check_sorted_positive_tail(d: &Distribution) -> Result<()> {
    let p = d.probs();
    if let Some(i) = p.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if let Some(i) = p.iter().skip(1).position(|&x| x <= 0.0) {
        return Err(Error::ZeroInTail { index: i + 1 });
    }
    Ok(())
}

fn first_violation(p: &Distribution, q: &Distribution) -> Result<Option<(usize, f64, f64)>> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "distributions have {} and {} outcomes",
            p.len(),
            q.len()
        )));
    }
    check_sorted_positive_tail(p)?;
    check_sorted_positive_tail(q)?;
    for j in 0..p.len() - 1 {
        let pr = p.probs[j] / p.probs[j + 1];
        let qr = q.probs[j] / q.probs[j + 1];
        if qr > pr * (1.0 + RATIO_TOL) {
            return Ok(Some((j, qr, pr)));
        }
    }
    Ok(None)
}

/// `true` iff `Q_j / Q_{j+1} <= P_j / P_{j+1}` for every `j` (relative slack
/// [`RATIO_TOL`]). Both inputs must be sorted ascending with a strictly
/// positive tail `P_1, …, P_{r-1}`.
pub fn dominates(p: &Distribution, q: &Distribution) -> Result<bool> {
    Ok(first_violation(p, q)?.is_none())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PqVerdict {
    pub entropy_p: f64,
    pub entropy_q: f64,
    /// `S(P) - S(Q)`
    pub margin: f64,
    /// Every adjacent ratio agrees within [`RATIO_TOL`].
    pub equality_case: bool,
    pub strict: bool,
    /// `S(Q) <= S(P)`, and `S(Q) = S(P)` in the equality case.
    pub holds: bool,
}

/// Entropy comparison for a dominating pair. Rejects pairs that fail
/// [`dominates`], naming the first violating index.
pub fn lemma_pq_verdict(p: &Distribution, q: &Distribution) -> Result<PqVerdict> {
    if let Some((index, q_ratio, p_ratio)) = first_violation(p, q)? {
        return Err(Error::NotDominated {
            index,
            q_ratio,
            p_ratio,
        });
    }
    let equality_case = p
        .adjacent_ratios()
        .iter()
        .zip(q.adjacent_ratios())
        .all(|(a, b)| (a - b).abs() <= RATIO_TOL * a.abs().max(b.abs()));
    let entropy_p = entropy(p);
    let entropy_q = entropy(q);
    let margin = entropy_p - entropy_q;
    let holds = margin >= -ENTROPY_TOL && (!equality_case || margin.abs() <= ENTROPY_TOL);
    Ok(PqVerdict {
        entropy_p,
        entropy_q,
        margin,
        equality_case,
        strict: margin > 0.0,
        holds,
    })
}

/// Adjacent ratios `s_0, …, s_{r-2}` of a distribution with `r` outcomes; the
/// terminal ratio `s_{r-1} = 1` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioChain {
    ratios: Vec<f64>,
}

impl RatioChain {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidRatioChain("need at least one ratio".into()));
        }
        if let Some((i, s)) = ratios
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::InvalidRatioChain(format!(
                "ratio {i} is {s}, expected finite and positive"
            )));
        }
        Ok(Self { ratios })
    }

    /// Recovers the chain of a distribution with every entry positive.
    pub fn from_distribution(d: &Distribution) -> Result<Self> {
        Self::new(d.adjacent_ratios())
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Number of outcomes of the parametrized distribution.
    pub fn outcomes(&self) -> usize {
        self.ratios.len() + 1
    }

    fn with_ratio(&self, k: usize, value: f64) -> Vec<f64> {
        let mut r = self.ratios.clone();
        r[k] = value;
        r
    }
}

fn distribution_from_log_ratios(ratios: &[f64]) -> Vec<f64> {
    // log s^{(l)} = Σ_{k >= l} log s_k, with s_{r-1} = 1.
    let r = ratios.len() + 1;
    let mut log_tail = vec![0.0; r];
    for l in (0..r - 1).rev() {
        log_tail[l] = log_tail[l + 1] + ratios[l].ln();
    }
    let lse = numeric::log_sum_exp(&log_tail);
    let mut t: Vec<f64> = log_tail.iter().map(|&x| (x - lse).exp()).collect();
    let total = numeric::sum(t.iter().copied());
    t.iter_mut().for_each(|x| *x /= total);
    t
}

/// `t_j = s^{(j)} / Σ_l s^{(l)}` with `s^{(l)} = Π_{k >= l} s_k`, evaluated
/// in log space.
pub fn distribution_from_ratios(c: &RatioChain) -> Distribution {
    Distribution {
        probs: distribution_from_log_ratios(&c.ratios),
    }
}

/// Entropy of the distribution parametrized by `ratios`; no domain checks.
pub(crate) fn chain_entropy(ratios: &[f64]) -> f64 {
    entropy_of(&distribution_from_log_ratios(ratios))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeProbe {
    pub slope: f64,
    /// All ratios lie in the open interval (0, 1), where the slope must be
    /// strictly positive.
    pub interior: bool,
    pub positive: bool,
}

/// Centered finite-difference slope of `S(distribution_from_ratios(c))` in
/// `s_k`. Requires `s_k - h > 0` and `s_k + h <= 1`.
pub fn ratio_monotonicity_probe(c: &RatioChain, k: usize, h: f64) -> Result<SlopeProbe> {
    if k >= c.ratios.len() {
        return Err(Error::InvalidInput(format!(
            "ratio index {k} out of range 0..{}",
            c.ratios.len()
        )));
    }
    let s = c.ratios[k];
    if !(h > 0.0) || s - h <= 0.0 || s + h > 1.0 {
        return Err(Error::StepOutOfDomain { value: s, step: h });
    }
    let up = chain_entropy(&c.with_ratio(k, s + h));
    let down = chain_entropy(&c.with_ratio(k, s - h));
    let slope = (up - down) / (2.0 * h);
    let interior = c.ratios.iter().all(|&x| x > 0.0 && x < 1.0);
    Ok(SlopeProbe {
        slope,
        interior,
        positive: slope > 0.0,
    })
}

/// Ratio chain with entries uniform on (0, 1].
pub fn sample_ratio_chain<R: Rng + ?Sized>(rng: &mut R, outcomes: usize) -> RatioChain {
    let ratios = (0..outcomes - 1)
        .map(|_| 1.0 - rng.random::<f64>())
        .collect();
    RatioChain { ratios }
}

/// A dominating pair `(P, Q)`: `P` from a random chain, `Q` from the same
/// chain with every ratio shrunk by an independent factor in (0, 1].
pub fn sample_dominating_pair<R: Rng + ?Sized>(
    rng: &mut R,
    outcomes: usize,
) -> (Distribution, Distribution) {
    let p_chain = sample_ratio_chain(rng, outcomes);
    let q_ratios: Vec<f64> = p_chain
        .ratios
        .iter()
        .map(|&s| s * (1.0 - rng.random::<f64>()))
        .collect();
    let p = distribution_from_ratios(&p_chain);
    let q = Distribution {
        probs: distribution_from_log_ratios(&q_ratios),
    };
    (p, q)
}

/// A pair with equal ratios reached by two routes: `P` directly from a random
/// chain, `Q` from the chain re-extracted from `P`.
pub fn sample_equal_pair<R: Rng + ?Sized>(
    rng: &mut R,
    outcomes: usize,
) -> (Distribution, Distribution) {
    let chain = sample_ratio_chain(rng, outcomes);
    let p = distribution_from_ratios(&chain);
    let back = RatioChain::from_distribution(&p).expect("chain entries are positive");
    let q = distribution_from_ratios(&back);
    (p, q)
}
