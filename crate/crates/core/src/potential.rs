//! Velocity potentials, their Maxwellian equilibria and the Schrödinger
//! potential of the unitarily equivalent operator.
//!
//! Every potential is stored in rescaled form
//!
//! ```text
//! W(v) = a4 v^4 + a3 |v|^3 + a2 v^2 + a1 v
//! ```
//!
//! together with the diffusivity `vartheta` of the operator
//! `Q f = d/dv (W' f + vartheta f')`. The swarming family with parameters
//! `(gamma, theta, delta, sigma)` maps to
//! `a4 = 1/4, a3 = -sigma sqrt(gamma)/3, a2 = -(1 - sigma)/2,
//! a1 = -delta/sqrt(gamma)` and `vartheta = theta/gamma`; the quadratic
//! reference potential is `W = v^2/2`.
//!
//! Potentials outside this polynomial family (for instance general
//! `|v|^a/a - |v|^b/b` wells) would only need another coefficient layout here;
//! nothing downstream depends on the polynomial form.

use crate::error::{bad_param, Error, Result};
use crate::quadrature::CompositeGauss;

/// Default Gauss points per panel for the normalization integrals.
pub const DEFAULT_QUAD_POINTS: usize = 32;
/// Default number of panels on `[-R, R]` for the normalization integrals.
pub const DEFAULT_QUAD_PANELS: usize = 200;
/// Largest admissible `M(±R) / max M` for a truncated domain.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-10;

/// Parameters of the swarming potential family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub gamma: f64,
    pub theta: f64,
    pub delta: f64,
    /// 0 selects the `v^2` well, 1 the singular `|v|^3` well.
    pub sigma: u8,
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(bad_param(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(bad_param(format!("theta must be positive, got {}", self.theta)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(bad_param(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if self.sigma > 1 {
            return Err(bad_param(format!("sigma must be 0 or 1, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// An immutable velocity potential with its cached equilibrium moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    family: Option<FamilyParams>,
    a4: f64,
    a3: f64,
    a2: f64,
    a1: f64,
    vartheta: f64,
    domain_r: f64,
    /// Minimum of `W` over the quadrature nodes; subtracted before
    /// exponentiating so that deep wells do not overflow.
    w_floor: f64,
    /// `int exp(-(W - w_floor)/vartheta) dv`.
    z_scaled: f64,
    mean_velocity: f64,
}

/// Builds a member of the swarming family on `[-domain_r, domain_r]`.
///
/// `quad_points` Gauss points are used on each of [`DEFAULT_QUAD_PANELS`]
/// panels to compute `Z` and `V`.
pub fn make_potential(
    gamma: f64,
    theta: f64,
    delta: f64,
    sigma: u8,
    domain_r: f64,
    quad_points: usize,
) -> Result<PotentialSpec> {
    let params = FamilyParams {
        gamma,
        theta,
        delta,
        sigma,
    };
    PotentialSpec::family(params, domain_r, quad_points)
}

impl PotentialSpec {
    pub fn family(params: FamilyParams, domain_r: f64, quad_points: usize) -> Result<Self> {
        params.validate()?;
        let sg = params.gamma.sqrt();
        let s = f64::from(params.sigma);
        Self::build(
            Some(params),
            [0.25, -s * sg / 3.0, -(1.0 - s) / 2.0, -params.delta / sg],
            params.theta / params.gamma,
            domain_r,
            quad_points,
        )
    }

    /// The quadratic reference potential `W = v^2/2` with diffusivity
    /// `vartheta`.
    pub fn quadratic(vartheta: f64, domain_r: f64) -> Result<Self> {
        if !(vartheta.is_finite() && vartheta > 0.0) {
            return Err(bad_param(format!("vartheta must be positive, got {vartheta}")));
        }
        Self::build(
            None,
            [0.0, 0.0, 0.5, 0.0],
            vartheta,
            domain_r,
            DEFAULT_QUAD_POINTS,
        )
    }

    fn build(
        family: Option<FamilyParams>,
        [a4, a3, a2, a1]: [f64; 4],
        vartheta: f64,
        domain_r: f64,
        quad_points: usize,
    ) -> Result<Self> {
        if !(domain_r.is_finite() && domain_r > 0.0) {
            return Err(bad_param(format!("domain R must be positive, got {domain_r}")));
        }
        if quad_points == 0 {
            return Err(bad_param("quadrature needs at least one point per panel"));
        }
        if !(vartheta.is_finite() && vartheta > 0.0) {
            return Err(bad_param(format!("vartheta must be positive, got {vartheta}")));
        }
        let mut spec = PotentialSpec {
            family,
            a4,
            a3,
            a2,
            a1,
            vartheta,
            domain_r,
            w_floor: 0.0,
            z_scaled: 1.0,
            mean_velocity: 0.0,
        };
        let quad = CompositeGauss::new(quad_points, DEFAULT_QUAD_PANELS);

        let mut w_floor = f64::INFINITY;
        quad.for_each_node(domain_r, |v, _| w_floor = w_floor.min(spec.w(v)));
        for v in [-domain_r, 0.0, domain_r] {
            w_floor = w_floor.min(spec.w(v));
        }
        if !w_floor.is_finite() {
            return Err(Error::NonNormalizable(format!(
                "potential minimum is not finite ({w_floor})"
            )));
        }
        spec.w_floor = w_floor;

        let boltzmann = |v: f64| (-(spec.w(v) - w_floor) / vartheta).exp();
        let (mut z, mut first) = (0.0, 0.0);
        quad.for_each_node(domain_r, |v, w| {
            let m = boltzmann(v);
            z += w * m;
            first += w * v * m;
        });
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::NonNormalizable(format!(
                "quadrature of exp(-W/vartheta) gave {z}"
            )));
        }
        let edge = boltzmann(-domain_r).max(boltzmann(domain_r));
        if !(edge < BOUNDARY_DECAY_TOL) {
            return Err(bad_param(format!(
                "domain R = {domain_r} too small: M(R)/max M = {edge:e}"
            )));
        }
        spec.z_scaled = z;
        // Exact zero for even potentials; the quadrature sum only cancels to
        // rounding.
        spec.mean_velocity = if a1 == 0.0 { 0.0 } else { first / z };
        Ok(spec)
    }

    pub fn family_params(&self) -> Option<FamilyParams> {
        self.family
    }

    /// Effective diffusivity of the rescaled operator.
    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }

    pub fn domain_r(&self) -> f64 {
        self.domain_r
    }

    /// Equilibrium mean velocity `V = int v M dv`.
    pub fn mean_velocity(&self) -> f64 {
        self.mean_velocity
    }

    /// `ln Z` with `Z = int exp(-W/vartheta) dv`.
    pub fn log_z(&self) -> f64 {
        self.z_scaled.ln() - self.w_floor / self.vartheta
    }

    /// Normalization constant `Z`; may overflow to infinity for deep wells,
    /// in which case [`log_z`](Self::log_z) stays finite.
    pub fn z(&self) -> f64 {
        self.log_z().exp()
    }

    /// True when the potential is even (`delta = 0`).
    pub fn is_symmetric(&self) -> bool {
        self.a1 == 0.0
    }

    /// Polynomial coefficients `[a4, a3, a2, a1]`.
    pub fn coefficients(&self) -> [f64; 4] {
        [self.a4, self.a3, self.a2, self.a1]
    }

    #[inline]
    fn w(&self, v: f64) -> f64 {
        let a = v.abs();
        let v2 = v * v;
        self.a4 * (v2 * v2) + self.a3 * (a * a * a) + self.a2 * v2 + self.a1 * v
    }

    /// `(W(v), W'(v), W''(v))`. The `|v|^3` term contributes `3 v |v|` and
    /// `6 |v|` to the derivatives, which are continuous at 0.
    #[inline]
    pub fn eval_w(&self, v: f64) -> (f64, f64, f64) {
        let a = v.abs();
        let v2 = v * v;
        let w = self.w(v);
        let dw = 4.0 * self.a4 * (v2 * v) + 3.0 * self.a3 * (v * a) + 2.0 * self.a2 * v + self.a1;
        let d2w = 12.0 * self.a4 * v2 + 6.0 * self.a3 * a + 2.0 * self.a2;
        (w, dw, d2w)
    }

    /// Schrödinger potential `Phi = -W''/2 + (W')^2 / (4 vartheta)`.
    #[inline]
    pub fn schrodinger_potential(&self, v: f64) -> f64 {
        let (_, dw, d2w) = self.eval_w(v);
        -0.5 * d2w + dw * dw / (4.0 * self.vartheta)
    }

    /// Maxwellian `M(v) = exp(-W(v)/vartheta) / Z`.
    #[inline]
    pub fn maxwellian(&self, v: f64) -> f64 {
        (-(self.w(v) - self.w_floor) / self.vartheta).exp() / self.z_scaled
    }

    /// `sqrt(M(v))`, the kernel direction of the Schrödinger operator.
    #[inline]
    pub fn maxwellian_sqrt(&self, v: f64) -> f64 {
        (-(self.w(v) - self.w_floor) / (2.0 * self.vartheta)).exp() / self.z_scaled.sqrt()
    }
}

/// Free-function form of [`PotentialSpec::eval_w`].
pub fn eval_w(spec: &PotentialSpec, v: f64) -> (f64, f64, f64) {
    spec.eval_w(v)
}

/// Free-function form of [`PotentialSpec::schrodinger_potential`].
pub fn schrodinger_potential(spec: &PotentialSpec, v: f64) -> f64 {
    spec.schrodinger_potential(v)
}

/// Free-function form of [`PotentialSpec::maxwellian_sqrt`].
pub fn maxwellian_sqrt(spec: &PotentialSpec, v: f64) -> f64 {
    spec.maxwellian_sqrt(v)
}
