//! Front end for the `spectral-coeffs` pipeline: configuration, single runs,
//! parameter sweeps, CSV and SVG output.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad parameter (also a non-normalizable potential, malformed config) |
//! | 3 | tunnelling collapse (also a division hazard) |
//! | 4 | no convergence (eigensolver, factorization, truncation or oracle quadrature) |
//! | 5 | I/O failure |

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

use std::path::PathBuf;

use spectral_coeffs::Error;

pub use config::{Case, Format, RunConfig, SweepParam};
pub use run::{emit_plots, evaluate, run_eigs, run_oracle, run_single, run_sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_PARAMETER: i32 = 2;
pub const EXIT_TUNNELLING_COLLAPSE: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;
pub const EXIT_IO_FAILURE: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("configuration: {0}")]
    Config(String),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Config(_) => EXIT_BAD_PARAMETER,
            CliError::Io { .. } => EXIT_IO_FAILURE,
        }
    }
}

pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::BadParameter(_)
        | Error::NonNormalizable(_)
        | Error::AssemblyFailure(_)
        | Error::MeshMismatch { .. } => EXIT_BAD_PARAMETER,
        Error::TunnellingCollapse { .. } | Error::DivisionHazard { .. } => EXIT_TUNNELLING_COLLAPSE,
        Error::NoConvergence(_)
        | Error::FactorizationFailure { .. }
        | Error::NonConvergentQuadrature { .. } => EXIT_NO_CONVERGENCE,
    }
}

/// Short tag used in the sweep `status` column.
pub fn status_tag(e: &CliError) -> &'static str {
    match e {
        CliError::Core(e) => match e {
            Error::BadParameter(_) => "bad_parameter",
            Error::NonNormalizable(_) => "non_normalizable",
            Error::AssemblyFailure(_) => "assembly_failure",
            Error::FactorizationFailure { .. } => "factorization_failure",
            Error::NoConvergence(_) => "no_convergence",
            Error::TunnellingCollapse { .. } => "tunnelling_collapse",
            Error::MeshMismatch { .. } => "mesh_mismatch",
            Error::DivisionHazard { .. } => "division_hazard",
            Error::NonConvergentQuadrature { .. } => "nonconvergent_quadrature",
        },
        CliError::Config(_) => "bad_parameter",
        CliError::Io { .. } => "io_failure",
    }
}
