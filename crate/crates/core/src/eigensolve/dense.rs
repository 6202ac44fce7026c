use nalgebra::{DMatrix, SymmetricEigen};

use crate::band::SymBandMatrix;
use crate::error::{Error, Result};

use super::lanczos::Ritz;

fn to_dense(m: &SymBandMatrix) -> DMatrix<f64> {
    let n = m.dim();
    let mut d = DMatrix::zeros(n, n);
    for (i, j, v) in m.triplets() {
        d[(i, j)] = v;
    }
    d
}

/// All eigenpairs of `(a, b)` through the standard form `L^{-1} A L^{-T}`
/// with `B = L L^T`; returns the `count` smallest.
pub(super) fn solve(a: &SymBandMatrix, b: &SymBandMatrix, count: usize) -> Result<Ritz> {
    let n = a.dim();
    let chol = to_dense(b).cholesky().ok_or_else(|| {
        // Locate the failing pivot with the banded factorization.
        b.cholesky()
            .err()
            .unwrap_or(Error::FactorizationFailure { row: 0, pivot: f64::NAN })
    })?;
    let l = chol.l();
    let mut c = to_dense(a);
    // c <- L^{-1} A L^{-T}
    if !l.solve_lower_triangular_mut(&mut c) {
        return Err(Error::FactorizationFailure { row: 0, pivot: 0.0 });
    }
    c.transpose_mut();
    l.solve_lower_triangular_mut(&mut c);
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let lt = l.transpose();
    let mut lambdas = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &k in order.iter().take(count) {
        let mut y = eig.eigenvectors.column(k).into_owned();
        lt.solve_upper_triangular_mut(&mut y);
        lambdas.push(eig.eigenvalues[k]);
        vectors.push(y.iter().copied().collect());
    }
    Ok(Ritz { lambdas, vectors })
}
