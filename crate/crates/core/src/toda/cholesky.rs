//! Envelope (skyline) Cholesky factorization for symmetric positive definite
//! matrices whose lower triangle is stored row by row from the first
//! structurally nonzero column.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EnvelopeMatrix {
    first: Vec<usize>,
    row_ptr: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeMatrix {
    /// Zero matrix whose row `i` may be nonzero in columns `first[i]..=i`.
    pub fn zeros(first: Vec<usize>) -> Self {
        let mut row_ptr = Vec::with_capacity(first.len() + 1);
        row_ptr.push(0);
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "envelope start {f} beyond the diagonal of row {i}");
            row_ptr.push(row_ptr[i] + i - f + 1);
        }
        let len = *row_ptr.last().unwrap_or(&0);
        Self {
            first,
            row_ptr,
            data: vec![0.0; len],
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Adds `v` to entry `(i, j)` of the lower triangle, `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && j >= self.first[i]);
        self.data[self.row_ptr[i] + j - self.first[i]] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.data[self.row_ptr[i] + j - self.first[i]]
        }
    }

    /// `y = A x` using the symmetric envelope.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let f = self.first[i];
            let row = &self.data[self.row_ptr[i]..self.row_ptr[i + 1]];
            for (c, &a) in (f..=i).zip(row) {
                y[i] += a * x[c];
                if c != i {
                    y[c] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place `A = L Lᵀ`.
    pub fn factor(mut self) -> Result<EnvelopeCholesky> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let (done, rest) = self.data.split_at_mut(self.row_ptr[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let row_j = &done[self.row_ptr[j]..self.row_ptr[j + 1]];
                let k0 = fi.max(fj);
                let s = dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let d = row_i[i - fi] - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::LinearSolve(format!(
                    "matrix is not positive definite (pivot {d:e} at row {i})"
                )));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { l: self })
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    l: EnvelopeMatrix,
}

impl EnvelopeCholesky {
    /// Solves `L Lᵀ x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let l = &self.l;
        let n = l.dim();
        for i in 0..n {
            let f = l.first[i];
            let row = &l.data[l.row_ptr[i]..l.row_ptr[i + 1]];
            let s = dot(&row[..i - f], &b[f..i]);
            b[i] = (b[i] - s) / row[i - f];
        }
        for i in (0..n).rev() {
            let f = l.first[i];
            let row = &l.data[l.row_ptr[i]..l.row_ptr[i + 1]];
            b[i] /= row[i - f];
            let xi = b[i];
            for (bk, &lk) in b[f..i].iter_mut().zip(&row[..i - f]) {
                *bk -= lk * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_banded_spd_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let first: Vec<usize> = (0..n).map(|i: usize| i.saturating_sub(rng.random_range(0..9))).collect();
        let mut a = EnvelopeMatrix::zeros(first.clone());
        for i in 0..n {
            for j in first[i]..i {
                a.add(i, j, rng.random::<f64>() - 0.5);
            }
        }
        // diagonal dominance makes it SPD
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            a.add(i, i, off + 1.0);
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = a.mul(&x);
        a.clone().factor().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = EnvelopeMatrix::zeros(vec![0, 0]);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(matches!(a.factor(), Err(Error::LinearSolve(_))));
    }
}
