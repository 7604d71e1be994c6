//! Process tomography: from measured outputs of known inputs to χ.
//!
//! Inputs are the projectors `|n⟩⟨m|`, realized physically through pure
//! preparations (see [`PreparationRecipe`]). The outputs are expanded in the
//! same state basis to give `λ`, the map `χ ↦ λ` is the matrix `β`, and χ is
//! recovered as `κλ` with `κ` the Moore–Penrose inverse of `β`. One and two
//! qubits also have closed forms in the standard operator basis.

mod reconstruct;
mod simulate;
mod states;

pub use reconstruct::{
    compute_beta, compute_lambda, lambda_1q, lambda_2q, permutation_2q, reconstruct_chi,
    reconstruct_chi_closed_form_1q, reconstruct_chi_closed_form_2q, BetaTensor, ChiSolver,
    LambdaMatrix, Reconstruction,
};
pub(crate) use simulate::record_rng;
pub use simulate::{
    exact_dataset_from_action, pauli_expectations, simulate_dataset, state_from_expectations,
    state_tomography, sub_seed, Shots, TomographyDataset,
};
pub use states::{projector_state_basis, PreparationRecipe, StateBasis};
