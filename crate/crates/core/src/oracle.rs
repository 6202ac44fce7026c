//! Reference values that do not touch the spectral pipeline: the
//! one-dimensional drift formula `K* = (1/vartheta) int (v - V)^2 M dv` and the
//! closed-form quadratic potential.
//!
//! The oracle only reads `W` and `vartheta` from the [`PotentialSpec`]; it
//! recomputes `Z` and `V` with its own quadrature.

use crate::error::{bad_param, Error, Result};
use crate::potential::PotentialSpec;
use crate::quadrature::CompositeGauss;

/// Gauss points per panel.
pub const ORACLE_POINTS: usize = 32;
/// Panels of the coarse level; the fine level doubles them.
pub const ORACLE_PANELS: usize = 200;
/// Largest accepted relative difference between the two levels.
pub const ORACLE_TOL: f64 = 1e-8;
/// The error estimate never drops below this fraction of `|K*|`, since two
/// converged levels can agree to the last bit by accident.
pub const ERROR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Fine-level Gauss value.
    pub k_star: f64,
    pub quad_error_estimate: f64,
    /// Left-endpoint rectangle value on a uniform grid with as many cells as
    /// the fine level has Gauss points.
    pub k_rectangle: f64,
    /// Mean velocity recomputed by the oracle.
    pub mean_velocity: f64,
}

/// `(K*, V)` from a weighted sum `visit` over nodes `(v, w)`.
fn drift_with<F>(spec: &PotentialSpec, for_each: F) -> (f64, f64)
where
    F: Fn(&mut dyn FnMut(f64, f64)),
{
    let vt = spec.vartheta();
    let mut w_min = f64::INFINITY;
    for_each(&mut |v, _| w_min = w_min.min(spec.eval_w(v).0));
    let boltzmann = |v: f64| (-(spec.eval_w(v).0 - w_min) / vt).exp();
    let (mut z, mut m1) = (0.0, 0.0);
    for_each(&mut |v, w| {
        let b = w * boltzmann(v);
        z += b;
        m1 += b * v;
    });
    let mean = m1 / z;
    let mut m2 = 0.0;
    for_each(&mut |v, w| m2 += w * boltzmann(v) * (v - mean) * (v - mean));
    (m2 / (z * vt), mean)
}

fn gauss_level(spec: &PotentialSpec, panels: usize) -> (f64, f64) {
    let r = spec.domain_r();
    let q = CompositeGauss::new(ORACLE_POINTS, panels);
    drift_with(spec, |visit| q.for_each_node(r, |v, w| visit(v, w)))
}

fn rectangle_level(spec: &PotentialSpec, cells: usize) -> f64 {
    let r = spec.domain_r();
    let h = 2.0 * r / cells as f64;
    drift_with(spec, |visit| {
        for i in 0..cells {
            visit(r * ((2 * i) as f64 - cells as f64) / cells as f64, h);
        }
    })
    .0
}

/// The drift coefficient from the one-dimensional formula.
///
/// Fails with [`Error::NonConvergentQuadrature`] when the two Gauss levels
/// differ by more than [`ORACLE_TOL`] relative.
pub fn drift_oracle(spec: &PotentialSpec) -> Result<OracleResult> {
    drift_oracle_with(spec, ORACLE_PANELS)
}

pub fn drift_oracle_with(spec: &PotentialSpec, panels: usize) -> Result<OracleResult> {
    if panels == 0 {
        return Err(bad_param("oracle needs at least one panel"));
    }
    let (coarse, _) = gauss_level(spec, panels);
    let (fine, mean_velocity) = gauss_level(spec, 2 * panels);
    let diff = (fine - coarse).abs();
    if !(fine.is_finite() && coarse.is_finite()) || diff > ORACLE_TOL * fine.abs() {
        return Err(Error::NonConvergentQuadrature { coarse, fine });
    }
    Ok(OracleResult {
        k_star: fine,
        quad_error_estimate: diff.max(ERROR_FLOOR * fine.abs()),
        k_rectangle: rectangle_level(spec, 2 * panels * ORACLE_POINTS),
        mean_velocity,
    })
}

/// Closed-form answers for `W = v^2/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticReference {
    pub vartheta: f64,
    /// `D = int v^2 M dv = vartheta`.
    pub d_exact: f64,
    /// `K = D / vartheta = 1`.
    pub k_exact: f64,
}

impl QuadraticReference {
    /// `lambda_n = n`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        n as f64
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count).map(|n| self.eigenvalue(n)).collect()
    }

    /// `eta_1` under the convention that `Psi_1` is positive for `v > 0`.
    pub fn eta_1(&self) -> f64 {
        -self.vartheta.sqrt()
    }

    pub fn omega_1(&self) -> f64 {
        -1.0 / self.vartheta.sqrt()
    }
}

pub fn quadratic_reference(vartheta: f64) -> Result<QuadraticReference> {
    if !(vartheta.is_finite() && vartheta > 0.0) {
        return Err(bad_param(format!("vartheta must be positive, got {vartheta}")));
    }
    Ok(QuadraticReference {
        vartheta,
        d_exact: vartheta,
        k_exact: 1.0,
    })
}
