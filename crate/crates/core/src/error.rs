//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("matrix is not Hermitian: max deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("operator is not a projection: residual {residual:.3e}")]
    NotProjection { residual: f64 },

    #[error("matrix is not a density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("basis columns are not orthonormal: deviation {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    #[error(
        "eigensolver did not converge: off-diagonal residual {residual:.3e} after {sweeps} sweeps"
    )]
    EigenFailure { residual: f64, sweeps: usize },

    #[error(
        "not a coupling: psd floor {psd_floor:.3e}, marginal residuals ({left:.3e}, {right:.3e})"
    )]
    NotCoupling {
        psd_floor: f64,
        left: f64,
        right: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("classification mismatch: schmidt data says {schmidt_class} but alpha = {alpha_value:.8} says {alpha_class}")]
    ClassificationMismatch {
        schmidt_class: String,
        alpha_class: String,
        alpha_value: f64,
    },

    #[error("internal cross-check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
