use thiserror::Error;

/// Errors raised by the spectral coefficient pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("potential is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("assembly failure: {0}")]
    AssemblyFailure(String),

    #[error("factorization failed: non-positive pivot {pivot:e} at row {row}")]
    FactorizationFailure { row: usize, pivot: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The zero mode cannot be separated from the next eigenvalue.
    #[error(
        "tunnelling collapse: smallest eigenvalues {smallest:e} and {next:e} \
         are not separable at tol_zero = {tol_zero:e}"
    )]
    TunnellingCollapse {
        smallest: f64,
        next: f64,
        tol_zero: f64,
    },

    #[error("mesh mismatch: expected {expected} values, found {found}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("division hazard: retained eigenvalue {lambda:e} at index {index} is not above tol_zero")]
    DivisionHazard { index: usize, lambda: f64 },

    #[error("quadrature did not converge: nested estimates {coarse:e} and {fine:e}")]
    NonConvergentQuadrature { coarse: f64, fine: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad_param(msg: impl Into<String>) -> Error {
    Error::BadParameter(msg.into())
}
