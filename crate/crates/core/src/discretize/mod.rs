//! Discretization of the Schrödinger operator `-vartheta d²/dv² + Phi` on
//! `[-R, R]` with homogeneous Dirichlet conditions.
//!
//! The finite element route assembles stiffness `A` and mass `B` for
//! Lagrange elements on Gauss–Lobatto nodes; the finite difference route is a
//! second-order cross-check with `B = h I`. Both produce a symmetric banded
//! pencil `(A, B)` over the interior unknowns only.

mod fd;
mod mesh;

use std::io::{self, Write};

use rayon::prelude::*;

use crate::band::SymBandMatrix;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

pub use fd::assemble_fd;
pub use mesh::{build_mesh, Mesh, ReferenceElement};

/// Largest relative asymmetry tolerated in an element matrix before it is
/// symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-13;

/// How a [`DiscreteOperator`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    FiniteElement { degree: usize },
    FiniteDifference,
}

/// The discrete pencil `(A, B)` after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub a: SymBandMatrix,
    pub b: SymBandMatrix,
    /// Coordinates of the unknowns.
    pub nodes: Vec<f64>,
    pub scheme: Scheme,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn bandwidth(&self) -> usize {
        self.a.bandwidth()
    }

    /// Writes `A` then `B` as `row col value` triplet lines (0-based indices,
    /// 17 significant digits), each block preceded by a `# name n nnz` line.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (name, m) in [("A", &self.a), ("B", &self.b)] {
            let t = m.triplets();
            writeln!(out, "# {name} {} {}", m.dim(), t.len())?;
            for (i, j, v) in t {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

struct ElementMatrices {
    stiffness: Vec<f64>,
    mass: Vec<f64>,
}

fn element_matrices(mesh: &Mesh, spec: &PotentialSpec, e: usize) -> Result<ElementMatrices> {
    let reference = mesh.reference();
    let n = mesh.degree() + 1;
    let jac = 0.5 * mesh.element_width();
    let vt = spec.vartheta();
    let mut stiffness = vec![0.0; n * n];
    let mut mass = vec![0.0; n * n];
    for (((x, w), phi), dphi) in mesh
        .element_quadrature(e)
        .zip(&reference.values)
        .zip(&reference.derivatives)
    {
        let pot = spec.schrodinger_potential(x);
        if !pot.is_finite() {
            return Err(Error::AssemblyFailure(format!(
                "Schrödinger potential is {pot} at v = {x}"
            )));
        }
        let grad_w = vt * w / (jac * jac);
        for i in 0..n {
            for j in 0..n {
                let pp = phi[i] * phi[j];
                stiffness[i * n + j] += grad_w * dphi[i] * dphi[j] + w * pot * pp;
                mass[i * n + j] += w * pp;
            }
        }
    }
    for m in [&mut stiffness, &mut mass] {
        let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m[i * n + j], m[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::AssemblyFailure(format!(
                        "element {e} asymmetric at ({i}, {j}): {a:e} vs {b:e}"
                    )));
                }
                let avg = 0.5 * (a + b);
                m[i * n + j] = avg;
                m[j * n + i] = avg;
            }
        }
    }
    Ok(ElementMatrices { stiffness, mass })
}

/// Assembles the finite element pencil for `spec` on `mesh`.
///
/// Element matrices are computed in parallel and summed into the global
/// matrices in element order, so the result does not depend on scheduling.
pub fn assemble(mesh: &Mesh, spec: &PotentialSpec) -> Result<DiscreteOperator> {
    let n = mesh.n_interior();
    let p = mesh.degree();
    let locals: Vec<ElementMatrices> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| element_matrices(mesh, spec, e))
        .collect::<Result<_>>()?;

    let mut a = SymBandMatrix::zeros(n, p);
    let mut b = SymBandMatrix::zeros(n, p);
    for (e, local) in locals.iter().enumerate() {
        for i in 0..=p {
            let Some(gi) = mesh.interior_index(e, i) else {
                continue;
            };
            for j in 0..=i {
                let Some(gj) = mesh.interior_index(e, j) else {
                    continue;
                };
                a.add(gi, gj, local.stiffness[i * (p + 1) + j]);
                b.add(gi, gj, local.mass[i * (p + 1) + j]);
            }
        }
    }
    Ok(DiscreteOperator {
        a,
        b,
        nodes: mesh.interior_nodes().to_vec(),
        scheme: Scheme::FiniteElement { degree: p },
    })
}
