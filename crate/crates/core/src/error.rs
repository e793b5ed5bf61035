//! Error type shared by every module of the crate.

/// Errors produced by linear algebra, splitting sweeps, and studies.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand shapes do not conform.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pivot fell below the singularity threshold during elimination.
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// A NaN or infinity was handed to a constructor.
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    /// The intra-step node grid cannot host the requested quadrature rule.
    #[error("grid incompatible with quadrature rule: {0}")]
    GridIncompatible(String),

    /// Too few usable points for an order fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A precondition on user-supplied parameters failed.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
