use thiserror::Error;

use crate::numerics::NumericsError;

/// Errors raised by the channel, tomography, metric and measurement layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitDimension(usize),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),

    #[error("operation is not trace preserving (completeness defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("output weight {0:.3e} is too small to renormalize")]
    ZeroWeight(f64),

    #[error("basis is degenerate (smallest/largest singular value {ratio:.3e})")]
    DegenerateBasis { ratio: f64 },

    #[error("basis has {found} elements, expected {expected}")]
    BasisSize { expected: usize, found: usize },

    #[error("chi matrix is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("data is inconsistent with a linear map: residual {residual:.3e} exceeds {bound:.3e}")]
    InconsistentData { residual: f64, bound: f64 },

    #[error("incomplete dataset: {0}")]
    IncompleteDataset(String),

    #[error("target is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("unknown branch {0:?}")]
    UnknownBranch(String),

    #[error(
        "branch probability {probability:.3e} is zero; the post-measurement state is undefined"
    )]
    ZeroProbabilityBranch { probability: f64 },

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
