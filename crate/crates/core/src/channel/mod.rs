//! Quantum operations in interchangeable representations.
//!
//! A channel can be held as a Kraus (operator-sum) set, as a χ matrix
//! relative to a fixed operator basis, or as a superoperator acting on
//! column-stacked density matrices. Equality between channels is only ever
//! judged at the superoperator level, since Kraus sets are not unique.

mod basis;
mod chi;
mod kraus;
pub mod models;
mod state;
mod superop;

pub(crate) use basis::Expansion;
pub use basis::{standard_basis, OperatorBasis};
pub use chi::{
    chi_to_kraus, independent_parameters, kraus_to_chi, trace_constraint_rank, ChiMatrix,
    KrausOptions,
};
pub use kraus::KrausSet;
pub use state::DensityMatrix;
pub use superop::{channel_distance, Superoperator};

/// Strict validation uses the nominal tolerances; lenient multiplies them by
/// ten and skips χ positivity, which shot noise routinely breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Strict,
    Lenient,
}

impl Validation {
    pub(crate) fn factor(self) -> f64 {
        match self {
            Validation::Strict => 1.0,
            Validation::Lenient => 10.0,
        }
    }
}

/// Nominal tolerances of the type invariants.
pub mod tolerance {
    pub const DENSITY: f64 = 1e-10;
    pub const KRAUS_COMPLETENESS: f64 = 1e-9;
    pub const CHI_HERMITIAN: f64 = 1e-9;
    pub const CHI_POSITIVE: f64 = 1e-8;
    pub const CHI_TRACE: f64 = 1e-8;
    pub const ZERO_WEIGHT: f64 = 1e-14;
    pub const HERMITICITY_PRESERVING: f64 = 1e-9;
}
