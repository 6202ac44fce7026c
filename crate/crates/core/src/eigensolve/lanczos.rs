//! Shift-invert Lanczos for the pencil `(A, B)` in the `B` inner product.
//!
//! The operator `OP = (A - shift B)^{-1} B` is self-adjoint in `<x, y>_B`; its
//! largest eigenvalues `theta` map to the pencil eigenvalues closest to the
//! shift through `lambda = shift + 1/theta`. The Krylov basis is kept in full
//! and reorthogonalized twice at every step, so there is no restart logic.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::band::SymBandMatrix;
use crate::error::{Error, Result};

const SEED: u64 = 0x5eed_1a7c_205e;
/// Ritz pairs are accepted once `|beta s_last| <= CONV_TOL * theta`.
const CONV_TOL: f64 = 1e-13;
const CHECK_EVERY: usize = 5;

pub(super) struct Ritz {
    /// Pencil eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

struct Basis<'a> {
    b: &'a SymBandMatrix,
    q: Vec<Vec<f64>>,
    bq: Vec<Vec<f64>>,
}

impl Basis<'_> {
    /// Two passes of classical Gram–Schmidt against the whole basis.
    fn orthogonalize(&self, w: &mut [f64]) {
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.bq.iter().map(|bq| dot(bq, w)).collect();
            for (c, q) in coeffs.iter().zip(&self.q) {
                axpy(-c, q, w);
            }
        }
    }

    /// `B`-normalizes `w` and appends it; returns its norm before scaling.
    fn push(&mut self, mut w: Vec<f64>) -> f64 {
        let mut bw = self.b.mul_vec(&w);
        let norm = dot(&w, &bw).max(0.0).sqrt();
        if norm > 0.0 {
            w.iter_mut().for_each(|x| *x /= norm);
            bw.iter_mut().for_each(|x| *x /= norm);
        }
        self.q.push(w);
        self.bq.push(bw);
        norm
    }
}

/// The `count` eigenpairs of `(a, b)` closest to `shift` from above.
///
/// `max_dim` bounds the Krylov dimension; exceeding it without convergence is
/// reported as [`Error::NoConvergence`].
pub(super) fn shift_invert(
    a: &SymBandMatrix,
    b: &SymBandMatrix,
    count: usize,
    shift: f64,
    max_dim: usize,
) -> Result<Ritz> {
    let n = a.dim();
    let max_dim = max_dim.min(n);
    let factor = a.axpy(-shift, b).cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut random_vector = |basis: &Basis| {
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // One application of OP smooths the start vector.
        let mut w = factor.solve(&b.mul_vec(&r));
        basis.orthogonalize(&mut w);
        w
    };

    let mut basis = Basis {
        b,
        q: Vec::with_capacity(max_dim),
        bq: Vec::with_capacity(max_dim),
    };
    let start = random_vector(&basis);
    basis.push(start);
    let mut alpha = Vec::with_capacity(max_dim);
    let mut beta: Vec<f64> = Vec::with_capacity(max_dim);

    loop {
        let j = alpha.len();
        let mut w = factor.solve(&basis.bq[j]);
        let aj = dot(&basis.bq[j], &w);
        axpy(-aj, &basis.q[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis.q[j - 1], &mut w);
        }
        basis.orthogonalize(&mut w);
        alpha.push(aj);
        let m = j + 1;

        let bw = b.mul_vec(&w);
        let mut bj = dot(&w, &bw).max(0.0).sqrt();
        let breakdown = bj <= 1e-14 * aj.abs().max(f64::MIN_POSITIVE);

        if m >= count && (m % CHECK_EVERY == 0 || m == max_dim || breakdown) {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta);
            let top: Vec<usize> = (0..count).collect();
            let converged = breakdown
                || top
                    .iter()
                    .all(|&k| (bj * s[(m - 1, k)]).abs() <= CONV_TOL * theta[k].abs());
            if converged {
                return Ok(ritz_pairs(&basis.q, &theta, &s, count, shift));
            }
        }
        if m == max_dim {
            return Err(Error::NoConvergence(format!(
                "Lanczos did not converge {count} eigenpairs within {max_dim} steps"
            )));
        }
        if breakdown {
            // Invariant subspace found before all requested pairs: continue
            // with a fresh direction orthogonal to it.
            w = random_vector(&basis);
            bj = 0.0;
            basis.push(w);
        } else {
            w.iter_mut().for_each(|x| *x /= bj);
            basis.q.push(w);
            basis.bq.push(bw.into_iter().map(|x| x / bj).collect());
        }
        beta.push(bj);
    }
}

/// Eigenvalues in descending order with the matching eigenvector columns.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let theta = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let s = DMatrix::from_fn(m, m, |i, k| eig.eigenvectors[(i, order[k])]);
    (theta, s)
}

fn ritz_pairs(q: &[Vec<f64>], theta: &[f64], s: &DMatrix<f64>, count: usize, shift: f64) -> Ritz {
    let n = q[0].len();
    let m = theta.len();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..count)
        .map(|k| {
            let mut y = vec![0.0; n];
            for (i, qi) in q.iter().take(m).enumerate() {
                axpy(s[(i, k)], qi, &mut y);
            }
            (shift + 1.0 / theta[k], y)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (lambdas, vectors) = pairs.into_iter().unzip();
    Ritz { lambdas, vectors }
}
