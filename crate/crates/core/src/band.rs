//! Symmetric banded matrices in lower-band storage and their Cholesky factors.

use crate::error::{Error, Result};

/// Symmetric `n x n` matrix with `half_bandwidth` sub-diagonals.
///
/// Row `i` stores columns `i - half_bandwidth ..= i` at
/// `data[i * (half_bandwidth + 1) + (j + half_bandwidth - i)]`; entries that
/// would fall left of column 0 are kept as zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    kd: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            kd: half_bandwidth,
            data: vec![0.0; n * (half_bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.kd
    }

    /// Full bandwidth `2 * half_bandwidth + 1`.
    pub fn bandwidth(&self) -> usize {
        2 * self.kd + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.kd {
            None
        } else {
            Some(r * (self.kd + 1) + (c + self.kd - r))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `value` to entry `(i, j)` (and implicitly `(j, i)`).
    ///
    /// Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band {}", self.kd));
        self.data[s] += value;
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band {}", self.kd));
        self.data[s] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let kd = self.kd;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * (kd + 1)..(i + 1) * (kd + 1)];
            let j0 = i.saturating_sub(kd);
            let mut acc = row[kd] * x[i];
            for j in j0..i {
                let a = row[j + kd - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
    }

    /// `x^T self y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.kd)..=i {
                let a = self.get(i, j).abs();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `self + alpha * other`; both operands must share dimension, and the
    /// result keeps the larger bandwidth.
    pub fn axpy(&self, alpha: f64, other: &SymBandMatrix) -> SymBandMatrix {
        assert_eq!(self.n, other.n);
        let kd = self.kd.max(other.kd);
        let mut out = SymBandMatrix::zeros(self.n, kd);
        for i in 0..self.n {
            for j in i.saturating_sub(kd)..=i {
                let v = self.get(i, j) + alpha * other.get(i, j);
                if v != 0.0 {
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Triplets `(row, col, value)` of the full (both triangles) nonzero
    /// pattern, in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            let hi = (i + self.kd).min(self.n - 1);
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Cholesky factorization `self = L L^T`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let kd = self.kd;
        let w = kd + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..=i {
                // L[i][j] = (A[i][j] - sum_k L[i][k] L[j][k]) / L[j][j]
                let k0 = j0.max(j.saturating_sub(kd));
                let mut s = l[i * w + (j + kd - i)];
                for k in k0..j {
                    s -= l[i * w + (k + kd - i)] * l[j * w + (k + kd - j)];
                }
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::FactorizationFailure { row: i, pivot: s });
                    }
                    l[i * w + kd] = s.sqrt();
                } else {
                    l[i * w + (j + kd - i)] = s / l[j * w + kd];
                }
            }
        }
        Ok(BandCholesky { n, kd, l })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        self.forward_in_place(b);
        self.backward_in_place(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Applies `L^{-1}` in place (forward substitution only).
    pub fn forward_in_place(&self, b: &mut [f64]) {
        let (kd, w) = (self.kd, self.kd + 1);
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i * w + (k + kd - i)] * b[k];
            }
            b[i] = s / self.l[i * w + kd];
        }
    }

    /// Applies `L^{-T}` in place (back substitution only).
    pub fn backward_in_place(&self, b: &mut [f64]) {
        let (kd, w) = (self.kd, self.kd + 1);
        for i in (0..self.n).rev() {
            let s = b[i] / self.l[i * w + kd];
            b[i] = s;
            for k in i.saturating_sub(kd)..i {
                b[k] -= self.l[i * w + (k + kd - i)] * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymBandMatrix {
        let mut m = SymBandMatrix::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
        }
        m
    }

    fn dense(m: &SymBandMatrix) -> Vec<Vec<f64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn storage_is_symmetric() {
        let mut m = SymBandMatrix::zeros(5, 2);
        m.add(3, 1, 4.0);
        assert_eq!(m.get(1, 3), 4.0);
        assert_eq!(m.get(3, 1), 4.0);
        assert_eq!(m.get(4, 0), 0.0);
        assert_eq!(m.bandwidth(), 5);
    }

    #[test]
    #[should_panic]
    fn add_outside_band_panics() {
        let mut m = SymBandMatrix::zeros(5, 1);
        m.add(4, 0, 1.0);
    }

    #[test]
    fn laplacian_solve() {
        let n = 50;
        let m = laplacian(n);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = m.mul_vec(&x_true);
        let x = m.cholesky().unwrap().solve(&b);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(m.norm_inf(), 4.0);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let mut m = laplacian(4);
        m.set(2, 2, -1.0);
        assert!(matches!(
            m.cholesky(),
            Err(Error::FactorizationFailure { row: 2, .. })
        ));
    }

    #[test]
    fn split_substitution_matches_solve() {
        let m = laplacian(7);
        let f = m.cholesky().unwrap();
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 3.0).collect();
        let mut y = b.clone();
        f.forward_in_place(&mut y);
        f.backward_in_place(&mut y);
        let x = f.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(
            n in 1usize..12,
            kd in 0usize..4,
            seed in proptest::collection::vec(-1.0f64..1.0, 64),
            x in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let mut m = SymBandMatrix::zeros(n, kd);
            let mut t = 0;
            for i in 0..n {
                for j in i.saturating_sub(kd)..=i {
                    m.set(i, j, seed[t % seed.len()]);
                    t += 1;
                }
            }
            let x = &x[..n];
            let y = m.mul_vec(x);
            let d = dense(&m);
            for i in 0..n {
                let expect: f64 = (0..n).map(|j| d[i][j] * x[j]).sum();
                prop_assert!((y[i] - expect).abs() < 1e-12);
            }
        }

        #[test]
        fn cholesky_reconstructs_spd(
            n in 1usize..15,
            kd in 0usize..4,
            seed in proptest::collection::vec(-1.0f64..1.0, 64),
        ) {
            // Diagonally dominant, hence SPD.
            let mut m = SymBandMatrix::zeros(n, kd);
            let mut t = 0;
            for i in 0..n {
                for j in i.saturating_sub(kd)..i {
                    m.set(i, j, seed[t % seed.len()]);
                    t += 1;
                }
                m.set(i, i, 2.0 * kd as f64 + 1.0);
            }
            let f = m.cholesky().unwrap();
            let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
            let x = f.solve(&b);
            let r = m.mul_vec(&x);
            for i in 0..n {
                prop_assert!((r[i] - b[i]).abs() < 1e-11);
            }
        }
    }
}
