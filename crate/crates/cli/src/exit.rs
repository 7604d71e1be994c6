//! Process exit codes: 0 ok, 1 other failure, 2 malformed or invalid input,
//! 3 dimension mismatch, 4 inconsistent data, 5 method/dimension mismatch,
//! 6 logarithm branch cut.

use std::fmt;

use qpt_core::numerics::NumericsError;
use qpt_core::Error;

pub const FAILURE: u8 = 1;
pub const MALFORMED: u8 = 2;
pub const DIMENSIONS: u8 = 3;
pub const INCONSISTENT: u8 = 4;
pub const METHOD: u8 = 5;
pub const BRANCH_CUT: u8 = 6;

/// An error whose exit code is decided by the command, not by its cause.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub message: String,
}

impl Coded {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::WrongDimension { .. }
        | Error::NotQubitDimension(_) => DIMENSIONS,
        Error::BasisSize { .. } => DIMENSIONS,
        Error::InconsistentData { .. } => INCONSISTENT,
        Error::Numerics(NumericsError::BranchCutEigenvalue { .. }) => BRANCH_CUT,
        Error::Numerics(NumericsError::ConvergenceFailure(_) | NumericsError::Singular) => FAILURE,
        Error::Numerics(_)
        | Error::InvalidDensityMatrix(_)
        | Error::InvalidKraus(_)
        | Error::NotTracePreserving { .. }
        | Error::NotPositive { .. }
        | Error::IncompleteDataset(_)
        | Error::NotUnitary { .. }
        | Error::UnknownBranch(_)
        | Error::InvalidInstrument(_)
        | Error::Malformed(_) => MALFORMED,
        Error::ZeroWeight(_)
        | Error::DegenerateBasis { .. }
        | Error::ZeroProbabilityBranch { .. } => FAILURE,
    }
}

pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return code_for(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return MALFORMED;
        }
    }
    FAILURE
}
