//! Reconstruction of quantum operations from tomographic data.
//!
//! The pipeline prepares a complete set of input states, reconstructs each
//! output by state tomography, expands the results in a state basis (`λ`),
//! and solves `β χ = λ` with a generalized inverse of `β` to obtain the χ
//! matrix of the unknown operation relative to a fixed operator basis. From
//! χ the crate recovers Kraus operators, the single-qubit Bloch affine map,
//! fidelity and capacity figures, a Lindblad generator, and the operations
//! attached to individual measurement outcomes.
//!
//! ```
//! use qpt_core::channel::{models, KrausSet};
//! use qpt_core::tomography::{self, Shots};
//!
//! let op = models::amplitude_damping(0.3).unwrap();
//! let data = tomography::simulate_dataset(&op, Shots::Exact, 0).unwrap();
//! let chi = tomography::reconstruct_chi_closed_form_1q(&data).unwrap();
//! let kraus = chi.to_kraus().unwrap();
//! let d = kraus.to_superoperator().distance(&op.to_superoperator()).unwrap();
//! assert!(d < 1e-9);
//! ```

pub mod bloch;
pub mod channel;
pub mod error;
pub mod format;
pub mod measurement;
pub mod metrics;
pub mod numerics;
pub mod pauli;
pub mod tomography;

pub use error::{Error, Result};
