use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix, CVector};

use super::{tolerance, Validation};

/// Hermitian, unit-trace, positive semidefinite `N×N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_validation(matrix, Validation::Strict)
    }

    pub fn with_validation(matrix: CMatrix, validation: Validation) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        numerics::check_square(&matrix)?;
        let tol = tolerance::DENSITY * validation.factor();

        let defect = numerics::hermiticity_defect(&matrix);
        if defect > tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace - c64(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {trace} differs from 1"
            )));
        }
        let matrix = numerics::hermitian_part(&matrix);
        let min = numerics::herm_eig(&matrix)?.min();
        if min < -tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let psi = psi.unscale(norm);
        Ok(Self {
            matrix: &psi * psi.adjoint(),
        })
    }

    /// `|k⟩⟨k|` in an `n`-dimensional space.
    pub fn basis_state(n: usize, k: usize) -> Self {
        let mut matrix = CMatrix::zeros(n, n);
        matrix[(k, k)] = c64(1.0, 0.0);
        Self { matrix }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n).unscale(n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        numerics::herm_eig(&self.matrix)
            .map(|e| numerics::spectrum_entropy(&e.eigenvalues))
            .unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}
