use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix, CVector};
use crate::pauli;

const RANK_RTOL: f64 = 1e-8;

/// Solves for expansion coefficients against a fixed set of `N×N` matrices.
///
/// Holds the inverse of the `N²×N²` matrix whose columns are the vectorized
/// elements, so `coefficients(X)` is one matrix-vector product.
#[derive(Debug, Clone)]
pub(crate) struct Expansion {
    dim: usize,
    inverse: CMatrix,
}

impl Expansion {
    pub(crate) fn new(elements: &[CMatrix]) -> Result<Self> {
        let first = elements.first().ok_or(Error::BasisSize {
            expected: 1,
            found: 0,
        })?;
        let dim = first.nrows();
        let n2 = dim * dim;
        if elements.len() != n2 {
            return Err(Error::BasisSize {
                expected: n2,
                found: elements.len(),
            });
        }
        let mut columns = CMatrix::zeros(n2, n2);
        for (k, e) in elements.iter().enumerate() {
            numerics::check_finite(e)?;
            if e.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.nrows().max(e.ncols()),
                });
            }
            columns.set_column(k, &numerics::vectorize(e));
        }
        let s = numerics::singular_values(&columns)?;
        let ratio = s[s.len() - 1] / s[0].max(f64::MIN_POSITIVE);
        if ratio <= RANK_RTOL {
            return Err(Error::DegenerateBasis { ratio });
        }
        let inverse = numerics::pseudo_inverse(&columns)?;
        Ok(Self { dim, inverse })
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn coefficients(&self, m: &CMatrix) -> Result<CVector> {
        if m.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(&self.inverse * numerics::vectorize(m))
    }
}

/// Ordered set of `N²` linearly independent operators `Ã_m`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    operators: Vec<CMatrix>,
    expansion: Expansion,
}

impl OperatorBasis {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let expansion = Expansion::new(&operators)?;
        Ok(Self {
            operators,
            expansion,
        })
    }

    /// `[I, σx, −iσy, σz]` and their `k`-fold tensor products in
    /// lexicographic order.
    pub fn standard(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "at least one qubit is required");
        let single: Vec<CMatrix> = (0..4).map(standard_factor).collect();
        let operators = (0..4usize.pow(n_qubits as u32))
            .map(|i| {
                let factors: Vec<&CMatrix> = pauli::digits(i, n_qubits)
                    .into_iter()
                    .map(|d| &single[d])
                    .collect();
                pauli::kron_all(factors)
            })
            .collect();
        Self::new(operators).expect("standard basis is linearly independent")
    }

    /// Matrix units `|i⟩⟨j|` in row-major order; works for any dimension.
    pub fn matrix_units(dim: usize) -> Self {
        let operators = (0..dim * dim)
            .map(|k| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(k / dim, k % dim)] = c64(1.0, 0.0);
                m
            })
            .collect();
        Self::new(operators).expect("matrix units are linearly independent")
    }

    /// The standard basis when `dim` is a power of two, matrix units otherwise.
    pub fn default_for_dim(dim: usize) -> Self {
        match pauli::qubit_count(dim) {
            Some(k) => Self::standard(k),
            None => Self::matrix_units(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.expansion.dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn get(&self, m: usize) -> &CMatrix {
        &self.operators[m]
    }

    /// Coefficients `a_m` with `op = Σ_m a_m Ã_m`.
    pub fn coefficients(&self, op: &CMatrix) -> Result<CVector> {
        self.expansion.coefficients(op)
    }

    /// Whether this is (numerically) the same ordered set as `other`.
    pub fn same_as(&self, other: &OperatorBasis) -> bool {
        self.len() == other.len()
            && self
                .operators
                .iter()
                .zip(&other.operators)
                .all(|(a, b)| a.shape() == b.shape() && (a - b).norm() < 1e-12)
    }
}

/// Standard basis for `n_qubits`.
pub fn standard_basis(n_qubits: usize) -> OperatorBasis {
    OperatorBasis::standard(n_qubits)
}

fn standard_factor(index: usize) -> CMatrix {
    match index {
        // −iσy = [[0, −1], [1, 0]]
        2 => pauli::sigma_y().map(|z| z * c64(0.0, -1.0)),
        k => pauli::single(k),
    }
}
