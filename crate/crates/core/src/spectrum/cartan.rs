use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

type Q = Ratio<i128>;

/// Type-A Cartan matrix of order `m`: 2 on the diagonal, −1 on the first
/// off-diagonals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanMatrix {
    order: usize,
}

impl CartanMatrix {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("Cartan matrix of order 0".into()));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        match i.abs_diff(j) {
            0 => 2,
            1 => -1,
            _ => 0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Exact determinant from the elimination pivots.
    pub fn determinant(&self) -> Q {
        self.pivots().into_iter().fold(Q::one(), |acc, p| acc * p)
    }

    fn pivots(&self) -> Vec<Q> {
        // Gaussian elimination on a tridiagonal matrix keeps the structure:
        // pivot_k = a_kk - a_{k,k-1} a_{k-1,k} / pivot_{k-1}
        let mut pivots = Vec::with_capacity(self.order);
        for k in 0..self.order {
            let diag = Q::from_integer(self.entry(k, k) as i128);
            let p = if k == 0 {
                diag
            } else {
                let lower = Q::from_integer(self.entry(k, k - 1) as i128);
                let upper = Q::from_integer(self.entry(k - 1, k) as i128);
                diag - lower * upper / pivots[k - 1]
            };
            pivots.push(p);
        }
        pivots
    }

    /// Solves `A x = b` exactly over the rationals.
    pub fn solve_exact(&self, rhs: &[Q]) -> Result<Vec<Q>> {
        if rhs.len() != self.order {
            return Err(Error::InvalidInput(format!(
                "rhs has {} entries, matrix order is {}",
                rhs.len(),
                self.order
            )));
        }
        let pivots = self.pivots();
        if pivots.iter().any(Zero::is_zero) {
            return Err(Error::InvalidInput("singular Cartan matrix".into()));
        }
        let n = self.order;
        // forward elimination
        let mut y = rhs.to_vec();
        for k in 1..n {
            let l = Q::from_integer(self.entry(k, k - 1) as i128) / pivots[k - 1];
            let prev = y[k - 1];
            y[k] -= l * prev;
        }
        // back substitution
        let mut x = vec![Q::zero(); n];
        for k in (0..n).rev() {
            let mut acc = y[k];
            if k + 1 < n {
                acc -= Q::from_integer(self.entry(k, k + 1) as i128) * x[k + 1];
            }
            x[k] = acc / pivots[k];
        }
        Ok(x)
    }
}

/// `λ_j`, `j = 1, …, r-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSpectrum {
    pub r: usize,
    pub values: Vec<f64>,
}

impl LambdaSpectrum {
    /// Closed form `λ_j = j (r - j)`.
    pub fn closed_form(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput(format!("rank r = {r} < 2")));
        }
        Ok(Self {
            r,
            values: (1..r).map(|j| (j * (r - j)) as f64).collect(),
        })
    }

    /// `λ_j`, 1-based. `λ_0 = λ_r = 0`.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 || j >= self.r {
            0.0
        } else {
            self.values[j - 1]
        }
    }
}

/// Exact rational solve of `Λ_{r-1} x = 2·1`, i.e. twice the row sums of the
/// inverse Cartan matrix.
pub fn lambda_exact(r: usize) -> Result<Vec<Q>> {
    if r < 2 {
        return Err(Error::InvalidInput(format!("rank r = {r} < 2")));
    }
    let a = CartanMatrix::new(r - 1)?;
    a.solve_exact(&vec![Q::from_integer(2); r - 1])
}

/// Solves the Cartan system exactly and checks `x_j = j(r-j)` before
/// returning the spectrum.
pub fn lambda_from_cartan(r: usize) -> Result<LambdaSpectrum> {
    let x = lambda_exact(r)?;
    for (i, v) in x.iter().enumerate() {
        let j = (i + 1) as i128;
        let expected = Q::from_integer(j * (r as i128 - j));
        if *v != expected {
            return Err(Error::InvalidInput(format!(
                "exact solve gave λ_{j} = {v}, expected {expected}"
            )));
        }
    }
    LambdaSpectrum::closed_form(r)
}

/// `(Λ_{m}^{-1})_{jk} = min(j,k)(m+1-max(j,k))/(m+1)`, 1-based, as floats.
pub fn inverse_cartan(order: usize) -> Vec<Vec<f64>> {
    let n = order + 1;
    (1..=order)
        .map(|j| {
            (1..=order)
                .map(|k| (j.min(k) * (n - j.max(k))) as f64 / n as f64)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        assert_eq!(lambda_from_cartan(2).unwrap().values, vec![1.0]);
        assert_eq!(lambda_from_cartan(4).unwrap().values, vec![3.0, 4.0, 3.0]);
        let x = lambda_exact(4).unwrap();
        assert_eq!(x, vec![Q::from_integer(3), Q::from_integer(4), Q::from_integer(3)]);
    }

    #[test]
    fn rejects_rank_below_two() {
        assert!(lambda_from_cartan(1).is_err());
        assert!(lambda_from_cartan(0).is_err());
    }

    #[test]
    fn determinant_is_order_plus_one() {
        for m in 1..60 {
            assert_eq!(
                CartanMatrix::new(m).unwrap().determinant(),
                Q::from_integer(m as i128 + 1)
            );
        }
    }

    #[test]
    fn dense_matrix_shape() {
        let a = CartanMatrix::new(3).unwrap().to_dense();
        assert_eq!(a, vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        for m in 1..8 {
            let a = CartanMatrix::new(m).unwrap();
            let inv = inverse_cartan(m);
            for i in 0..m {
                for j in 0..m {
                    let v: f64 = (0..m).map(|k| a.entry(i, k) as f64 * inv[k][j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-14);
                }
            }
        }
    }
}
