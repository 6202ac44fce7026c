//! Drift and diffusion coefficients of one-dimensional kinetic Fokker–Planck
//! operators, computed from the eigenexpansion of the equivalent Schrödinger
//! operator `H = -vartheta d²/dv² + Phi` on a truncated velocity domain.
//!
//! The pipeline is
//! [`potential`] → [`discretize`] → [`eigensolve`] → [`coefficients`],
//! with [`oracle`] supplying independent reference values.

pub mod band;
pub mod coefficients;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod oracle;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
