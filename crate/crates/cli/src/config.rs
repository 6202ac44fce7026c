//! Run configuration: a flat TOML document in which every key is optional.
//!
//! ```toml
//! case = "A"              # A, B, C, quadratic or custom
//! gamma = 10.0
//! theta = 1.0
//! # delta, sigma: fixed by the case; free for "custom"
//! # vartheta = 1.0        # quadratic case only
//! sweep_param = "gamma"   # gamma, theta, delta or vartheta
//! sweep_values = [1.0, 10.0, 50.0]
//! R = 10.0
//! n_elements = 1000
//! degree = 10
//! quad_degree = 21
//! n_max = 50
//! rel_tol = 1e-8
//! rule = "composite-rectangle"
//! output_dir = "out"
//! formats = ["csv"]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spectral_coeffs::coefficients::QuadratureRule;
use spectral_coeffs::eigensolve::{Method, DEFAULT_S_TOL, DEFAULT_TOL, DEFAULT_TOL_ZERO};
use spectral_coeffs::potential::{make_potential, PotentialSpec, DEFAULT_QUAD_POINTS};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Symmetric `v^2` well.
    #[serde(rename = "A", alias = "a")]
    A,
    /// Symmetric singular `|v|^3` well.
    #[serde(rename = "B", alias = "b")]
    B,
    /// Tilted `v^2` well, `delta > 0`.
    #[serde(rename = "C", alias = "c")]
    C,
    /// `W = v^2/2` with diffusivity `vartheta`.
    #[serde(rename = "quadratic")]
    Quadratic,
    /// Explicit `(gamma, theta, delta, sigma)`.
    #[serde(rename = "custom")]
    Custom,
}

impl FromStr for Case {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "A" | "a" => Ok(Case::A),
            "B" | "b" => Ok(Case::B),
            "C" | "c" => Ok(Case::C),
            "quadratic" => Ok(Case::Quadratic),
            "custom" => Ok(Case::Custom),
            _ => Err(CliError::config(format!("unknown case {s:?}"))),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
            Case::Quadratic => "quadratic",
            Case::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Gamma,
    Theta,
    Delta,
    Vartheta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Theta => "theta",
            SweepParam::Delta => "delta",
            SweepParam::Vartheta => "vartheta",
        }
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "gamma" => Ok(SweepParam::Gamma),
            "theta" => Ok(SweepParam::Theta),
            "delta" => Ok(SweepParam::Delta),
            "vartheta" => Ok(SweepParam::Vartheta),
            _ => Err(CliError::config(format!("unknown sweep parameter {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(CliError::config(format!("unknown output format {s:?}"))),
        }
    }
}

/// Spatial discretization used by the `eigs` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Fem,
    Fd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    pub gamma: f64,
    pub theta: f64,
    /// Defaults to 0 for A, B and custom, 1 for C.
    pub delta: Option<f64>,
    /// Defaults to 0 for A, C and custom, 1 for B.
    pub sigma: Option<u8>,
    pub vartheta: f64,
    pub sweep_param: Option<SweepParam>,
    pub sweep_values: Option<Vec<f64>>,
    #[serde(rename = "R", alias = "r")]
    pub r: f64,
    pub n_elements: usize,
    pub degree: usize,
    /// Polynomial exactness of the element quadrature.
    pub quad_degree: usize,
    /// Gauss points per panel for `Z` and `V`.
    pub quad_points: usize,
    pub n_max: usize,
    pub rel_tol: f64,
    pub rule: String,
    pub output_dir: PathBuf,
    pub formats: Vec<String>,
    pub tol: f64,
    pub tol_zero: f64,
    pub s_tol: f64,
    /// Relative `|K - K*|/K*` above which the drift is flagged.
    pub oracle_tol: f64,
    /// auto, lanczos or dense.
    pub method: String,
    pub scheme: SchemeKind,
    pub fd_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: Case::A,
            gamma: 1.0,
            theta: 1.0,
            delta: None,
            sigma: None,
            vartheta: 1.0,
            sweep_param: None,
            sweep_values: None,
            r: 10.0,
            n_elements: 1000,
            degree: 10,
            quad_degree: 21,
            quad_points: DEFAULT_QUAD_POINTS,
            n_max: 50,
            rel_tol: 1e-8,
            rule: QuadratureRule::CompositeRectangle.tag().to_string(),
            output_dir: PathBuf::from("out"),
            formats: vec!["csv".to_string()],
            tol: DEFAULT_TOL,
            tol_zero: DEFAULT_TOL_ZERO,
            s_tol: DEFAULT_S_TOL,
            oracle_tol: 1e-4,
            method: "auto".to_string(),
            scheme: SchemeKind::Fem,
            fd_points: 4001,
        }
    }
}

/// Potential parameters after the case defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub gamma: f64,
    pub theta: f64,
    pub delta: f64,
    pub sigma: u8,
    pub vartheta: f64,
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolved(&self) -> Result<Resolved, CliError> {
        let (delta, sigma) = match self.case {
            Case::A | Case::B => {
                let sigma = u8::from(self.case == Case::B);
                if self.delta.is_some_and(|d| d != 0.0) {
                    return Err(CliError::config(format!("case {} has delta = 0", self.case)));
                }
                if self.sigma.is_some_and(|s| s != sigma) {
                    return Err(CliError::config(format!("case {} has sigma = {sigma}", self.case)));
                }
                (0.0, sigma)
            }
            Case::C => {
                if self.sigma.is_some_and(|s| s != 0) {
                    return Err(CliError::config("case C has sigma = 0"));
                }
                let delta = self.delta.unwrap_or(1.0);
                if !(delta > 0.0) {
                    return Err(CliError::config(format!("case C needs delta > 0, got {delta}")));
                }
                (delta, 0)
            }
            Case::Quadratic | Case::Custom => (self.delta.unwrap_or(0.0), self.sigma.unwrap_or(0)),
        };
        Ok(Resolved {
            gamma: self.gamma,
            theta: self.theta,
            delta,
            sigma,
            vartheta: self.vartheta,
        })
    }

    pub fn quadrature_rule(&self) -> Result<QuadratureRule, CliError> {
        Ok(self.rule.parse()?)
    }

    pub fn eigen_method(&self) -> Result<Method, CliError> {
        match self.method.as_str() {
            "auto" => Ok(Method::Auto),
            "lanczos" => Ok(Method::Lanczos),
            "dense" => Ok(Method::Dense),
            m => Err(CliError::config(format!("unknown eigensolver {m:?}"))),
        }
    }

    pub fn output_formats(&self) -> Result<Vec<Format>, CliError> {
        let mut out = Vec::new();
        for f in &self.formats {
            let f: Format = f.parse()?;
            if !out.contains(&f) {
                out.push(f);
            }
        }
        Ok(out)
    }

    pub fn is_sweep(&self) -> bool {
        self.sweep_param.is_some() || self.sweep_values.is_some()
    }

    /// Checks everything that does not need the potential itself.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = self.resolved()?;
        match self.case {
            Case::Quadratic => positive("vartheta", p.vartheta)?,
            _ => {
                positive("gamma", p.gamma)?;
                positive("theta", p.theta)?;
                if !(p.delta.is_finite() && p.delta >= 0.0) {
                    return Err(CliError::config(format!("delta must be nonnegative, got {}", p.delta)));
                }
                if p.sigma > 1 {
                    return Err(CliError::config(format!("sigma must be 0 or 1, got {}", p.sigma)));
                }
            }
        }
        positive("R", self.r)?;
        positive("tol", self.tol)?;
        positive("tol_zero", self.tol_zero)?;
        positive("s_tol", self.s_tol)?;
        positive("oracle_tol", self.oracle_tol)?;
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(CliError::config(format!("rel_tol must be nonnegative, got {}", self.rel_tol)));
        }
        if self.n_max < 5 {
            return Err(CliError::config(format!("n_max must be at least 5, got {}", self.n_max)));
        }
        if self.quad_points == 0 {
            return Err(CliError::config("quad_points must be positive"));
        }
        self.quadrature_rule()?;
        self.eigen_method()?;
        self.output_formats()?;
        Ok(())
    }

    /// The sweep parameter and values, validated against the case.
    pub fn sweep(&self) -> Result<(SweepParam, Vec<f64>), CliError> {
        let param = self
            .sweep_param
            .ok_or_else(|| CliError::config("sweep needs sweep_param"))?;
        let values = self.sweep_values.clone().unwrap_or_default();
        if values.is_empty() {
            return Err(CliError::config("sweep_values is empty"));
        }
        let allowed = match self.case {
            Case::Quadratic => param == SweepParam::Vartheta,
            Case::A | Case::B => matches!(param, SweepParam::Gamma | SweepParam::Theta),
            Case::C | Case::Custom => param != SweepParam::Vartheta,
        };
        if !allowed {
            return Err(CliError::config(format!(
                "case {} cannot sweep {}",
                self.case,
                param.name()
            )));
        }
        for &v in &values {
            let point = self.at(param, v);
            point.validate()?;
        }
        Ok((param, values))
    }

    /// A copy of this config with `param` set to `value` and no sweep.
    pub fn at(&self, param: SweepParam, value: f64) -> RunConfig {
        let mut c = self.clone();
        c.sweep_param = None;
        c.sweep_values = None;
        match param {
            SweepParam::Gamma => c.gamma = value,
            SweepParam::Theta => c.theta = value,
            SweepParam::Delta => c.delta = Some(value),
            SweepParam::Vartheta => c.vartheta = value,
        }
        c
    }

    pub fn potential(&self) -> Result<PotentialSpec, CliError> {
        let p = self.resolved()?;
        let spec = match self.case {
            Case::Quadratic => PotentialSpec::quadratic(p.vartheta, self.r)?,
            _ => make_potential(p.gamma, p.theta, p.delta, p.sigma, self.r, self.quad_points)?,
        };
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_alone_is_valid() {
        let c = RunConfig::from_toml("case = \"B\"").unwrap();
        assert_eq!(c.case, Case::B);
        assert_eq!((c.r, c.n_elements, c.degree, c.quad_degree), (10.0, 1000, 10, 21));
        c.validate().unwrap();
        let p = c.resolved().unwrap();
        assert_eq!((p.delta, p.sigma), (0.0, 1));
    }

    #[test]
    fn empty_document_uses_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("gama = 3.0").is_err());
    }

    #[test]
    fn case_conflicts() {
        let c = RunConfig::from_toml("case = \"A\"\ndelta = 2.0").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml("case = \"C\"").unwrap();
        assert_eq!(c.resolved().unwrap().delta, 1.0);
        let c = RunConfig::from_toml("case = \"C\"\nsigma = 1").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_validation() {
        let c = RunConfig::from_toml("sweep_param = \"gamma\"\nsweep_values = []").unwrap();
        assert!(c.sweep().is_err());
        let c = RunConfig::from_toml("sweep_param = \"gamma\"\nsweep_values = [1.0, -2.0]").unwrap();
        assert!(c.sweep().is_err());
        let c = RunConfig::from_toml("sweep_param = \"delta\"\nsweep_values = [1.0]").unwrap();
        assert!(c.sweep().is_err());
        let c = RunConfig::from_toml("case = \"C\"\nsweep_param = \"delta\"\nsweep_values = [1.0, 5.0]")
            .unwrap();
        let (p, v) = c.sweep().unwrap();
        assert_eq!((p, v), (SweepParam::Delta, vec![1.0, 5.0]));
        assert_eq!(c.at(p, 5.0).resolved().unwrap().delta, 5.0);
    }

    #[test]
    fn formats_and_rule() {
        let c = RunConfig::from_toml("formats = [\"csv\", \"png\"]").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml("formats = [\"svg\", \"csv\", \"svg\"]\nrule = \"gauss\"").unwrap();
        assert_eq!(c.output_formats().unwrap(), vec![Format::Svg, Format::Csv]);
        assert_eq!(c.quadrature_rule().unwrap(), QuadratureRule::PerElementGauss);
    }
}
