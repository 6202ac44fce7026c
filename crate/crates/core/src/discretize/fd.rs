use crate::band::SymBandMatrix;
use crate::error::{bad_param, Error, Result};
use crate::potential::PotentialSpec;

use super::{DiscreteOperator, Scheme};

/// Second-order central differences for `-vartheta u'' + Phi u` on a uniform
/// grid of `n_points` over `[-r, r]` with Dirichlet ends.
///
/// Rows are scaled by the spacing `h` and `B = h I`, so the pencil has the same
/// eigenvalues as the unscaled difference operator and eigenvectors are
/// normalized against the same discrete L² product as the finite element
/// vectors.
pub fn assemble_fd(r: f64, n_points: usize, spec: &PotentialSpec) -> Result<DiscreteOperator> {
    if !(r.is_finite() && r > 0.0) {
        return Err(bad_param(format!("R must be positive, got {r}")));
    }
    if n_points < 3 || n_points % 2 == 0 {
        return Err(bad_param(format!(
            "grid point count must be odd and at least 3, got {n_points}"
        )));
    }
    let cells = (n_points - 1) as f64;
    let h = 2.0 * r / cells;
    let vt = spec.vartheta();
    let n = n_points - 2;
    let nodes: Vec<f64> = (1..=n)
        .map(|i| r * ((2 * i) as f64 - cells) / cells)
        .collect();
    let mut a = SymBandMatrix::zeros(n, 1);
    let mut b = SymBandMatrix::zeros(n, 0);
    for (i, &v) in nodes.iter().enumerate() {
        let pot = spec.schrodinger_potential(v);
        if !pot.is_finite() {
            return Err(Error::AssemblyFailure(format!(
                "Schrödinger potential is {pot} at v = {v}"
            )));
        }
        a.set(i, i, h * (2.0 * vt / (h * h) + pot));
        if i > 0 {
            a.set(i, i - 1, -vt / h);
        }
        b.set(i, i, h);
    }
    Ok(DiscreteOperator {
        a,
        b,
        nodes,
        scheme: Scheme::FiniteDifference,
    })
}
