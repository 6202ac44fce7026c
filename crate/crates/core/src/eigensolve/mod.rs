//! Lowest eigenpairs of the discrete Schrödinger pencil, zero-mode
//! identification and the parity diagnostic for symmetric potentials.

mod dense;
mod lanczos;

use std::io::{self, Write};

use crate::discretize::{DiscreteOperator, Mesh};
use crate::error::{bad_param, Error, Result};
use crate::potential::PotentialSpec;

/// Default solver tolerance; also the magnitude of the negative shift.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default threshold below which an eigenvalue counts as the zero mode.
pub const DEFAULT_TOL_ZERO: f64 = 1e-8;
/// Default asymmetry score above which parity counts as broken.
pub const DEFAULT_S_TOL: f64 = 1e-4;
/// Largest dimension handed to the dense fallback.
pub const DENSE_LIMIT: usize = 2000;
/// Largest accepted `|x_i^T B x_j - delta_ij|`.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Most negative shift tried when `A + tol B` is not positive definite.
pub const MAX_SHIFT: f64 = 1e8;

/// Which algorithm computes the eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Shift-invert Lanczos, with the dense solver as fallback when Lanczos
    /// fails on a small problem or the request covers most of the spectrum.
    Auto,
    Lanczos,
    Dense,
}

/// The lowest eigenpairs of a pencil `(A, B)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal coefficient vectors with the sign convention of
    /// [`fix_sign`].
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||A x - lambda B x|| / ||B x||` per pair.
    pub residuals: Vec<f64>,
    /// Normwise backward error
    /// `||A x - lambda B x|| / ((||A|| + |lambda| ||B||) ||x||)` per pair,
    /// with infinity norms for the matrices.
    pub backward_errors: Vec<f64>,
    /// `max |x_i^T B x_j - delta_ij|`.
    pub orthonormality_error: f64,
    /// Algorithm that produced the pairs (never `Auto`).
    pub method: Method,
    /// Coordinates of the unknowns.
    pub nodes: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Dimension of the eigenvectors.
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Writes one row per eigenpair: `index,lambda` followed by the nodal
    /// values. The header names the node columns by their coordinates.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "index,lambda")?;
        for v in &self.nodes {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
        for (k, (lambda, x)) in self.eigenvalues.iter().zip(&self.eigenvectors).enumerate() {
            write!(out, "{k},{lambda:.16e}")?;
            for xi in x {
                write!(out, ",{xi:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Flips `x` so that its rightmost entry of magnitude at least `1e-3 max|x|`
/// is positive.
///
/// Entries near the Dirichlet boundary are dominated by rounding noise for
/// confined potentials, so the reference entry is the outermost one that
/// still carries signal.
pub fn fix_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(r) = x.iter().rev().find(|v| v.abs() >= 1e-3 * max) {
        if *r < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `(relative residual, backward error)` of one pair.
fn residual(op: &DiscreteOperator, norms: (f64, f64), x: &[f64], lambda: f64) -> (f64, f64) {
    let ax = op.a.mul_vec(x);
    let bx = op.b.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
    let nr = norm(&r);
    (nr / norm(&bx), nr / ((norms.0 + lambda.abs() * norms.1) * norm(x)))
}

/// The `count` algebraically smallest eigenpairs of `op` with [`Method::Auto`].
pub fn lowest_eigenpairs(op: &DiscreteOperator, count: usize, tol: f64) -> Result<SpectralDecomposition> {
    lowest_eigenpairs_with(op, count, tol, Method::Auto)
}

pub fn lowest_eigenpairs_with(
    op: &DiscreteOperator,
    count: usize,
    tol: f64,
    method: Method,
) -> Result<SpectralDecomposition> {
    let n = op.dim();
    if count < 2 {
        return Err(bad_param(format!("need at least 2 eigenpairs, asked for {count}")));
    }
    if count > n {
        return Err(bad_param(format!(
            "asked for {count} eigenpairs of a {n}-dimensional problem"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(bad_param(format!("tolerance must be positive, got {tol}")));
    }
    let max_dim = 3 * count + 150;
    let lanczos = || {
        let mut shift = -tol;
        let ritz = loop {
            match lanczos::shift_invert(&op.a, &op.b, count, shift, max_dim) {
                // The pencil has eigenvalues below the shift (a coarse or
                // non-variational scheme); move the shift further down.
                Err(Error::FactorizationFailure { .. }) if shift > -MAX_SHIFT => shift *= 100.0,
                other => break other?,
            }
        };
        checked(finish(op, ritz, Method::Lanczos), tol)
    };
    let dense = || checked(finish(op, dense::solve(&op.a, &op.b, count)?, Method::Dense), tol);
    match method {
        Method::Dense => dense(),
        Method::Lanczos => lanczos(),
        Method::Auto if 2 * count > n => dense(),
        Method::Auto => match lanczos() {
            Err(Error::NoConvergence(_)) if n <= DENSE_LIMIT => dense(),
            other => other,
        },
    }
}

/// Rejects decompositions whose backward errors exceed `tol` or whose
/// vectors have lost `B`-orthonormality.
fn checked(dec: SpectralDecomposition, tol: f64) -> Result<SpectralDecomposition> {
    for (k, &e) in dec.backward_errors.iter().enumerate() {
        if !(e <= tol) {
            return Err(Error::NoConvergence(format!(
                "{:?} backward error {e:e} of pair {k} above tolerance {tol:e}",
                dec.method
            )));
        }
    }
    if !(dec.orthonormality_error <= ORTHONORMALITY_TOL) {
        return Err(Error::NoConvergence(format!(
            "{:?} eigenvectors lost B-orthonormality ({:e})",
            dec.method, dec.orthonormality_error
        )));
    }
    Ok(dec)
}

fn finish(op: &DiscreteOperator, ritz: lanczos::Ritz, method: Method) -> SpectralDecomposition {
    let lanczos::Ritz { lambdas, mut vectors } = ritz;
    let mut bx = Vec::with_capacity(vectors.len());
    for x in vectors.iter_mut() {
        fix_sign(x);
        let s = op.b.inner(x, x).sqrt();
        x.iter_mut().for_each(|v| *v /= s);
        bx.push(op.b.mul_vec(x));
    }
    let mut orthonormality_error = 0.0_f64;
    for (i, x) in vectors.iter().enumerate() {
        for bxj in &bx[..=i] {
            let target = if std::ptr::eq(bxj, &bx[i]) { 1.0 } else { 0.0 };
            let g: f64 = x.iter().zip(bxj).map(|(p, q)| p * q).sum();
            orthonormality_error = orthonormality_error.max((g - target).abs());
        }
    }
    let norms = (op.a.norm_inf(), op.b.norm_inf());
    let (residuals, backward_errors) = lambdas
        .iter()
        .zip(&vectors)
        .map(|(&l, x)| residual(op, norms, x, l))
        .unzip();
    SpectralDecomposition {
        eigenvalues: lambdas,
        eigenvectors: vectors,
        residuals,
        backward_errors,
        orthonormality_error,
        method,
        nodes: op.nodes.clone(),
    }
}

/// The eigenpair identified as the kernel direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMode {
    pub index: usize,
    /// Distance from the zero mode to the nearest other eigenvalue.
    pub gap: f64,
    pub tol_zero: f64,
}

/// Picks the eigenvalue of smallest magnitude and checks that it is
/// separated from every other one.
///
/// Fails with [`Error::TunnellingCollapse`] unless `|lambda_index| <= tol_zero`
/// and every other eigenvalue is at least `10 tol_zero` in magnitude.
pub fn identify_zero_mode(dec: &SpectralDecomposition, tol_zero: f64) -> Result<ZeroMode> {
    zero_mode_of(&dec.eigenvalues, tol_zero)
}

/// [`identify_zero_mode`] on a bare ascending list of eigenvalues.
pub fn zero_mode_of(eigenvalues: &[f64], tol_zero: f64) -> Result<ZeroMode> {
    if !(tol_zero.is_finite() && tol_zero > 0.0) {
        return Err(bad_param(format!("tol_zero must be positive, got {tol_zero}")));
    }
    if eigenvalues.len() < 2 {
        return Err(bad_param("zero-mode identification needs two eigenvalues"));
    }
    let by_magnitude = |&i: &usize, &j: &usize| eigenvalues[i].abs().total_cmp(&eigenvalues[j].abs());
    let index = (0..eigenvalues.len()).min_by(by_magnitude).unwrap_or(0);
    let runner_up = (0..eigenvalues.len())
        .filter(|&i| i != index)
        .min_by(by_magnitude)
        .unwrap_or(0);
    let smallest = eigenvalues[index];
    let next = eigenvalues[runner_up];
    if smallest.abs() > tol_zero || next.abs() < 10.0 * tol_zero {
        return Err(Error::TunnellingCollapse {
            smallest,
            next,
            tol_zero,
        });
    }
    Ok(ZeroMode {
        index,
        gap: (next - smallest).abs(),
        tol_zero,
    })
}

/// Parity score of one eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryScore {
    /// `min_p ||psi(v) - p psi(-v)|| / ||psi||` over `p = +1, -1`.
    pub score: f64,
    /// The minimizing parity.
    pub parity: i8,
    pub broken: bool,
}

/// Parity score of a finite element function on a mesh symmetric about 0.
pub fn reflection_score(mesh: &Mesh, x: &[f64]) -> Result<(f64, i8)> {
    let n = mesh.n_interior();
    if x.len() != n {
        return Err(Error::MeshMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let norm2 = mesh.l2_inner(x, x);
    let mut best = (f64::INFINITY, 1);
    for p in [1i8, -1] {
        let d: Vec<f64> = (0..n).map(|i| x[i] - f64::from(p) * x[n - 1 - i]).collect();
        let s = (mesh.l2_inner(&d, &d) / norm2).max(0.0).sqrt();
        if s < best.0 {
            best = (s, p);
        }
    }
    Ok(best)
}

/// Scores of the first two eigenfunctions; `broken` is set above `s_tol`.
///
/// Only meaningful for symmetric potentials, so a tilted `spec` is rejected.
pub fn symmetry_diagnostic(
    dec: &SpectralDecomposition,
    mesh: &Mesh,
    spec: &PotentialSpec,
    s_tol: f64,
) -> Result<Vec<SymmetryScore>> {
    if !spec.is_symmetric() {
        return Err(bad_param("symmetry diagnostic requires delta = 0"));
    }
    dec.eigenvectors
        .iter()
        .take(2)
        .map(|x| {
            let (score, parity) = reflection_score(mesh, x)?;
            Ok(SymmetryScore {
                score,
                parity,
                broken: score > s_tol,
            })
        })
        .collect()
}
