//! Projection of the cell-problem right-hand sides on the eigenbasis and the
//! truncated diffusion and drift sums
//!
//! ```text
//! D^N = sum_{k <= N} eta_k^2 / lambda_k,   K^N = sum_{k <= N} eta_k omega_k / lambda_k
//! ```
//!
//! taken over the eigenpairs other than the zero mode.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::discretize::Mesh;
use crate::eigensolve::{SpectralDecomposition, ZeroMode};
use crate::error::{bad_param, Error, Result};
use crate::potential::PotentialSpec;

/// Floor applied to `|S_N|` in the truncation rule so that a vanishing sum
/// does not make the relative test undefined.
pub const ABS_FLOOR: f64 = 1e-300;
/// Number of consecutive small increments required by [`auto_truncate`].
pub const STABLE_INCREMENTS: usize = 3;

/// The two right-hand sides of the cell problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    /// `h_chi(v) = -(v - V) sqrt(M(v))`.
    Chi,
    /// `h_kappa(v) = -W'(v) sqrt(M(v)) / vartheta`.
    Kappa,
}

/// Right-hand side sampled at every global mesh node, boundary included.
#[derive(Debug, Clone)]
pub struct RhsSamples {
    pub kind: RhsKind,
    pub values: Vec<f64>,
}

/// Evaluates the right-hand side `kind` at `v`.
pub fn rhs_value(spec: &PotentialSpec, kind: RhsKind, v: f64) -> f64 {
    let sqrt_m = spec.maxwellian_sqrt(v);
    match kind {
        RhsKind::Chi => -(v - spec.mean_velocity()) * sqrt_m,
        RhsKind::Kappa => -spec.eval_w(v).1 * sqrt_m / spec.vartheta(),
    }
}

pub fn rhs_samples(spec: &PotentialSpec, mesh: &Mesh, kind: RhsKind) -> RhsSamples {
    RhsSamples {
        kind,
        values: mesh.nodes().iter().map(|&v| rhs_value(spec, kind, v)).collect(),
    }
}

/// Quadrature used to form the Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Left-endpoint rectangles over the global node set.
    CompositeRectangle,
    /// The finite element interpolant of the samples integrated exactly
    /// against each eigenfunction with the element Gauss rule.
    PerElementGauss,
}

impl QuadratureRule {
    pub fn tag(self) -> &'static str {
        match self {
            QuadratureRule::CompositeRectangle => "composite-rectangle",
            QuadratureRule::PerElementGauss => "per-element-gauss",
        }
    }
}

impl fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "composite-rectangle" | "rectangle" => Ok(QuadratureRule::CompositeRectangle),
            "per-element-gauss" | "gauss" => Ok(QuadratureRule::PerElementGauss),
            _ => Err(bad_param(format!("unknown quadrature rule {s:?}"))),
        }
    }
}

/// `int rhs Psi_k dv` for every eigenvector `Psi_k` of `dec`.
pub fn fourier_coefficients(
    dec: &SpectralDecomposition,
    rhs: &RhsSamples,
    mesh: &Mesh,
    rule: QuadratureRule,
) -> Result<Vec<f64>> {
    let n = mesh.n_interior();
    if dec.dim() != n {
        return Err(Error::MeshMismatch {
            expected: n,
            found: dec.dim(),
        });
    }
    if rhs.values.len() != n + 2 {
        return Err(Error::MeshMismatch {
            expected: n + 2,
            found: rhs.values.len(),
        });
    }
    let interior = &rhs.values[1..=n];
    let weights: Vec<f64> = match rule {
        QuadratureRule::CompositeRectangle => {
            // Node i+1 (interior index i) owns the cell to its right.
            let nodes = mesh.nodes();
            (0..n)
                .map(|i| (nodes[i + 2] - nodes[i + 1]) * interior[i])
                .collect()
        }
        QuadratureRule::PerElementGauss => {
            // b = B h: the interior interpolant paired through the mass
            // matrix, i.e. exact integration of two degree-p polynomials.
            let mut b = vec![0.0; n];
            for e in 0..mesh.n_elements() {
                let he = mesh.element_values(interior, e);
                for (((_, w), row), hq) in mesh
                    .element_quadrature(e)
                    .zip(&mesh.reference().values)
                    .zip(&he)
                {
                    for (j, phi) in row.iter().enumerate() {
                        if let Some(g) = mesh.interior_index(e, j) {
                            b[g] += w * hq * phi;
                        }
                    }
                }
            }
            b
        }
    };
    Ok(dec
        .eigenvectors
        .iter()
        .map(|x| x.iter().zip(&weights).map(|(a, b)| a * b).sum())
        .collect())
}

/// Both Fourier coefficient sequences, indexed like the eigenpairs of the
/// decomposition they came from (zero mode included).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    pub eta: Vec<f64>,
    pub omega: Vec<f64>,
    pub rule: QuadratureRule,
}

impl FourierCoefficients {
    pub fn compute(
        dec: &SpectralDecomposition,
        spec: &PotentialSpec,
        mesh: &Mesh,
        rule: QuadratureRule,
    ) -> Result<Self> {
        let eta = fourier_coefficients(dec, &rhs_samples(spec, mesh, RhsKind::Chi), mesh, rule)?;
        let omega = fourier_coefficients(dec, &rhs_samples(spec, mesh, RhsKind::Kappa), mesh, rule)?;
        Ok(Self { eta, omega, rule })
    }
}

/// Running sums over the retained (non-zero) modes. Entry `i` of every
/// vector refers to the `(i + 1)`-th retained mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    /// Index of each retained mode in the decomposition.
    pub modes: Vec<usize>,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub omega: Vec<f64>,
    pub d_partial: Vec<f64>,
    pub k_partial: Vec<f64>,
    /// Set by [`CoefficientSeries::with_auto_truncation`].
    pub n_auto: Option<usize>,
}

impl CoefficientSeries {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `D^N` for `N >= 1`.
    pub fn d(&self, n: usize) -> f64 {
        self.d_partial[n - 1]
    }

    /// `K^N` for `N >= 1`.
    pub fn k(&self, n: usize) -> f64 {
        self.k_partial[n - 1]
    }

    pub fn with_auto_truncation(mut self, rel_tol: f64) -> Result<Self> {
        self.n_auto = Some(auto_truncate(&self, rel_tol)?);
        Ok(self)
    }

    /// CSV with columns `n,lambda_n,eta_n,omega_n,D_partial,K_partial`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,lambda_n,eta_n,omega_n,D_partial,K_partial")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                i + 1,
                self.lambda[i],
                self.eta[i],
                self.omega[i],
                self.d_partial[i],
                self.k_partial[i]
            )?;
        }
        Ok(())
    }
}

/// Forms `D^n`, `K^n` for `n = 1..=n_max` from the first `n_max` modes after
/// excluding `zero.index`.
pub fn truncated_coefficients(
    dec: &SpectralDecomposition,
    zero: &ZeroMode,
    eta: &[f64],
    omega: &[f64],
    n_max: usize,
) -> Result<CoefficientSeries> {
    if eta.len() != dec.len() || omega.len() != dec.len() {
        return Err(Error::MeshMismatch {
            expected: dec.len(),
            found: eta.len().min(omega.len()),
        });
    }
    if n_max == 0 || n_max + 1 > dec.len() {
        return Err(bad_param(format!(
            "cannot retain {n_max} modes from {} eigenpairs",
            dec.len()
        )));
    }
    let modes: Vec<usize> = (0..dec.len()).filter(|&k| k != zero.index).take(n_max).collect();
    let mut series = CoefficientSeries {
        modes: Vec::with_capacity(n_max),
        lambda: Vec::with_capacity(n_max),
        eta: Vec::with_capacity(n_max),
        omega: Vec::with_capacity(n_max),
        d_partial: Vec::with_capacity(n_max),
        k_partial: Vec::with_capacity(n_max),
        n_auto: None,
    };
    let (mut d, mut k) = (0.0, 0.0);
    for idx in modes {
        let lambda = dec.eigenvalues[idx];
        if lambda <= zero.tol_zero {
            return Err(Error::DivisionHazard { index: idx, lambda });
        }
        d += eta[idx] * eta[idx] / lambda;
        k += eta[idx] * omega[idx] / lambda;
        series.modes.push(idx);
        series.lambda.push(lambda);
        series.eta.push(eta[idx]);
        series.omega.push(omega[idx]);
        series.d_partial.push(d);
        series.k_partial.push(k);
    }
    Ok(series)
}

/// Smallest `N >= 3` whose last three increments of both partial sums are
/// each below `rel_tol |S_N|` (with `|S_N|` floored at [`ABS_FLOOR`]).
pub fn auto_truncate(series: &CoefficientSeries, rel_tol: f64) -> Result<usize> {
    if !(rel_tol.is_finite() && rel_tol >= 0.0) {
        return Err(bad_param(format!("rel_tol must be nonnegative, got {rel_tol}")));
    }
    if series.len() < STABLE_INCREMENTS {
        return Err(bad_param(format!(
            "truncation rule needs {STABLE_INCREMENTS} retained modes, have {}",
            series.len()
        )));
    }
    let settled = |partial: &[f64], n: usize| {
        let scale = partial[n - 1].abs().max(ABS_FLOOR);
        (n - STABLE_INCREMENTS..n).all(|i| {
            let prev = if i == 0 { 0.0 } else { partial[i - 1] };
            (partial[i] - prev).abs() < rel_tol * scale
        })
    };
    (STABLE_INCREMENTS..=series.len())
        .find(|&n| settled(&series.d_partial, n) && settled(&series.k_partial, n))
        .ok_or_else(|| {
            Error::NoConvergence(format!(
                "partial sums not settled to rel_tol = {rel_tol:e} within {} modes",
                series.len()
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble, build_mesh};
    use crate::eigensolve::{identify_zero_mode, lowest_eigenpairs, zero_mode_of, Method};
    use crate::potential::make_potential;
    use approx::assert_relative_eq;

    fn fake_dec(eigenvalues: Vec<f64>) -> SpectralDecomposition {
        let n = eigenvalues.len();
        SpectralDecomposition {
            eigenvalues,
            eigenvectors: vec![vec![0.0; 3]; n],
            residuals: vec![0.0; n],
            backward_errors: vec![0.0; n],
            orthonormality_error: 0.0,
            method: Method::Dense,
            nodes: vec![-1.0, 0.0, 1.0],
        }
    }

    fn series_from(eta: &[f64], omega: &[f64], lambdas: &[f64]) -> CoefficientSeries {
        let mut ev = vec![0.0];
        ev.extend_from_slice(lambdas);
        let dec = fake_dec(ev);
        let zero = zero_mode_of(&dec.eigenvalues, 1e-8).unwrap();
        let mut e = vec![0.0];
        e.extend_from_slice(eta);
        let mut o = vec![0.0];
        o.extend_from_slice(omega);
        truncated_coefficients(&dec, &zero, &e, &o, lambdas.len()).unwrap()
    }

    #[test]
    fn rhs_parity_and_quadratic_identity() {
        let spec = make_potential(1.0, 1.0, 0.0, 0, 10.0, 32).unwrap();
        let mesh = build_mesh(10.0, 20, 3, 7).unwrap();
        let chi = rhs_samples(&spec, &mesh, RhsKind::Chi);
        let n = chi.values.len();
        assert_eq!(chi.values[n / 2], 0.0);
        for i in 0..n {
            assert_eq!(chi.values[i], -chi.values[n - 1 - i]);
        }
        let quad = PotentialSpec::quadratic(1.0, 10.0).unwrap();
        let c = rhs_samples(&quad, &mesh, RhsKind::Chi);
        let k = rhs_samples(&quad, &mesh, RhsKind::Kappa);
        assert_eq!(c.values, k.values);
    }

    #[test]
    fn sums_skip_zero_mode_by_index() {
        let s = series_from(&[1.0, 2.0, 0.5], &[2.0, -1.0, 0.5], &[1.0, 2.0, 4.0]);
        assert_eq!(s.modes, vec![1, 2, 3]);
        assert_eq!(s.d_partial, vec![1.0, 3.0, 3.0625]);
        assert_eq!(s.k_partial, vec![2.0, 1.0, 1.0625]);
        assert_eq!(s.d(2), 3.0);
    }

    #[test]
    fn division_hazard() {
        let dec = fake_dec(vec![0.0, 1.0, 5e-9]);
        let zero = ZeroMode {
            index: 0,
            gap: 1.0,
            tol_zero: 1e-8,
        };
        assert!(matches!(
            truncated_coefficients(&dec, &zero, &[0.0; 3], &[0.0; 3], 2),
            Err(Error::DivisionHazard { index: 2, .. })
        ));
    }

    #[test]
    fn truncation_rule() {
        let s = series_from(
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            &[1.0, 2.0, 3.0, 4.0, 5.0],
        );
        assert_eq!(auto_truncate(&s, 1e-10).unwrap(), 4);
        assert!(matches!(auto_truncate(&s, 0.0), Err(Error::NoConvergence(_))));
        let short = series_from(&[1.0, 0.0], &[1.0, 0.0], &[1.0, 2.0]);
        assert!(matches!(auto_truncate(&short, 1e-3), Err(Error::BadParameter(_))));
    }

    #[test]
    fn zero_valued_drift_settles_through_floor() {
        // K vanishes identically; the floor keeps the relative test defined.
        let s = series_from(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(auto_truncate(&s, 1e-10).unwrap(), 4);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("gauss".parse::<QuadratureRule>().unwrap(), QuadratureRule::PerElementGauss);
        assert_eq!(
            QuadratureRule::CompositeRectangle.to_string().parse::<QuadratureRule>().unwrap(),
            QuadratureRule::CompositeRectangle
        );
        assert!("simpson".parse::<QuadratureRule>().is_err());
    }

    #[test]
    fn quadratic_single_mode() {
        let spec = PotentialSpec::quadratic(1.0, 10.0).unwrap();
        let mesh = build_mesh(10.0, 100, 4, 9).unwrap();
        let op = assemble(&mesh, &spec).unwrap();
        let dec = lowest_eigenpairs(&op, 8, 1e-8).unwrap();
        let zero = identify_zero_mode(&dec, 1e-8).unwrap();
        for rule in [QuadratureRule::CompositeRectangle, QuadratureRule::PerElementGauss] {
            let f = FourierCoefficients::compute(&dec, &spec, &mesh, rule).unwrap();
            assert_relative_eq!(f.eta[1], -1.0, max_relative = 1e-9);
            assert_relative_eq!(f.omega[1], -1.0, max_relative = 1e-9);
            let s = truncated_coefficients(&dec, &zero, &f.eta, &f.omega, 7).unwrap();
            for n in 1..=7 {
                assert_relative_eq!(s.d(n), 1.0, max_relative = 1e-8);
                assert_relative_eq!(s.k(n), 1.0, max_relative = 1e-8);
            }
            assert_eq!(auto_truncate(&s, 1e-10).unwrap(), 4);
        }
    }

    #[test]
    fn mesh_mismatch() {
        let spec = PotentialSpec::quadratic(1.0, 10.0).unwrap();
        let mesh = build_mesh(10.0, 20, 2, 5).unwrap();
        let other = build_mesh(10.0, 22, 2, 5).unwrap();
        let op = assemble(&mesh, &spec).unwrap();
        let dec = lowest_eigenpairs(&op, 3, 1e-8).unwrap();
        let rhs = rhs_samples(&spec, &mesh, RhsKind::Chi);
        assert!(matches!(
            fourier_coefficients(&dec, &rhs, &other, QuadratureRule::CompositeRectangle),
            Err(Error::MeshMismatch { .. })
        ));
        let rhs_other = rhs_samples(&spec, &other, RhsKind::Chi);
        assert!(matches!(
            fourier_coefficients(&dec, &rhs_other, &mesh, QuadratureRule::PerElementGauss),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn csv_columns() {
        let s = series_from(&[1.0, 0.5], &[1.0, 0.5], &[1.0, 2.0]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,lambda_n,eta_n,omega_n,D_partial,K_partial"));
        assert_eq!(
            lines.next(),
            Some("1,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0")
        );
    }

    #[test]
    fn case_a_parity_sparsity() {
        // The rectangle rule is not parity-symmetric; its error decays like
        // the Fourier transform of the integrand at 2 pi / h, so the mesh
        // must resolve the Maxwellian well.
        let spec = make_potential(1.0, 1.0, 0.0, 0, 10.0, 32).unwrap();
        let mesh = build_mesh(10.0, 200, 6, 13).unwrap();
        let op = assemble(&mesh, &spec).unwrap();
        let dec = lowest_eigenpairs(&op, 8, 1e-8).unwrap();
        let f = FourierCoefficients::compute(&dec, &spec, &mesh, QuadratureRule::CompositeRectangle)
            .unwrap();
        for (k, x) in dec.eigenvectors.iter().enumerate() {
            let (_, parity) = crate::eigensolve::reflection_score(&mesh, x).unwrap();
            if parity == 1 {
                assert!(f.eta[k].abs() < 1e-12 && f.omega[k].abs() < 1e-12, "k={k} {} {}", f.eta[k], f.omega[k]);
            } else {
                assert!(f.eta[k].abs() > 1e-6, "k={k}");
            }
        }
    }
}
