use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix};

use super::{tolerance, KrausSet, OperatorBasis, Superoperator, Validation};

/// Thresholds used when turning a χ matrix back into Kraus operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausOptions {
    /// Eigenvalues down to `-negative_tolerance` are clamped to zero; anything
    /// more negative is reported as [`Error::NotPositive`].
    pub negative_tolerance: f64,
    /// Eigenvalues at or below this are dropped from the Kraus set.
    pub rank_cutoff: f64,
}

impl Default for KrausOptions {
    fn default() -> Self {
        Self {
            negative_tolerance: 1e-8,
            rank_cutoff: 1e-10,
        }
    }
}

/// The χ matrix of a channel relative to an operator basis:
/// `E(ρ) = Σ_mn χ_mn Ã_m ρ Ã_n†`.
#[derive(Debug, Clone)]
pub struct ChiMatrix {
    basis: OperatorBasis,
    matrix: CMatrix,
    trace_preserving: bool,
}

impl ChiMatrix {
    pub fn new(
        basis: OperatorBasis,
        matrix: CMatrix,
        trace_preserving: bool,
        validation: Validation,
    ) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        let d = basis.len();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if matrix.nrows() != d {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        let factor = validation.factor();
        let defect = numerics::hermiticity_defect(&matrix);
        if defect > tolerance::CHI_HERMITIAN * factor * matrix.norm().max(1.0) {
            return Err(numerics::NumericsError::NotHermitian { defect }.into());
        }
        let chi = Self {
            basis,
            matrix: numerics::hermitian_part(&matrix),
            trace_preserving,
        };
        if validation == Validation::Strict {
            let min = chi.min_eigenvalue()?;
            if min < -tolerance::CHI_POSITIVE {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }
        if trace_preserving {
            let defect = chi.trace_preservation_defect();
            if defect > tolerance::CHI_TRACE * factor {
                return Err(Error::NotTracePreserving { defect });
            }
        }
        Ok(chi)
    }

    pub(crate) fn from_parts_unchecked(
        basis: OperatorBasis,
        matrix: CMatrix,
        trace_preserving: bool,
    ) -> Self {
        Self {
            basis,
            matrix,
            trace_preserving,
        }
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ_mn χ_mn Ã_n†Ã_m`, which equals `I` for trace-preserving channels.
    pub fn trace_condition(&self) -> CMatrix {
        let n = self.dim();
        let ops = self.basis.operators();
        let mut acc = CMatrix::zeros(n, n);
        for (m, am) in ops.iter().enumerate() {
            for (k, an) in ops.iter().enumerate() {
                let c = self.matrix[(m, k)];
                if c.norm() != 0.0 {
                    acc += (an.adjoint() * am).map(|z| z * c);
                }
            }
        }
        acc
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let n = self.dim();
        (self.trace_condition() - CMatrix::identity(n, n)).norm()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(numerics::herm_eig(&self.matrix)?.min())
    }

    /// Applies the channel to an arbitrary `N×N` matrix.
    pub fn apply_linear(&self, x: &CMatrix) -> Result<CMatrix> {
        self.to_superoperator().apply(x)
    }

    pub fn to_superoperator(&self) -> Superoperator {
        Superoperator::from_chi(self)
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        self.to_kraus_with(&KrausOptions::default())
    }

    /// `A_i = √d_i Σ_j V_ji Ã_j` from the eigendecomposition `χ = V d V†`.
    pub fn to_kraus_with(&self, options: &KrausOptions) -> Result<KrausSet> {
        let operators = self.kraus_operators(options)?;
        KrausSet::with_validation(operators, self.trace_preserving, Validation::Lenient)
    }

    /// `A_i = √d_i Σ_j V_ji Ã_j` in descending eigenvalue order, unvalidated.
    fn kraus_operators(&self, options: &KrausOptions) -> Result<Vec<CMatrix>> {
        let eig = numerics::herm_eig(&self.matrix)?;
        if eig.min() < -options.negative_tolerance {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min(),
            });
        }
        let n = self.dim();
        let ops = self.basis.operators();
        let mut operators = Vec::new();
        for i in (0..eig.eigenvalues.len()).rev() {
            let d = eig.eigenvalues[i].max(0.0);
            if d <= options.rank_cutoff {
                continue;
            }
            let root = d.sqrt();
            let a = ops
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(n, n), |acc, (j, op)| {
                    acc + op.map(|z| z * eig.eigenvectors[(j, i)] * root)
                });
            operators.push(a);
        }
        if operators.is_empty() {
            return Err(Error::InvalidKraus(
                "chi matrix has no weight above the rank cutoff".into(),
            ));
        }
        Ok(operators)
    }

    /// Projects onto physical channels: negative eigenvalues are clamped to
    /// zero and, for trace-preserving χ, the Kraus operators are rescaled by
    /// `Q^{-1/2}` with `Q = Σ A_i†A_i` so completeness holds again.
    pub fn project_physical(&self) -> Result<ChiMatrix> {
        let options = KrausOptions {
            negative_tolerance: f64::INFINITY,
            rank_cutoff: 0.0,
        };
        let operators = self.kraus_operators(&options)?;
        if !self.trace_preserving {
            let chi = operators.iter().try_fold(
                CMatrix::zeros(self.matrix.nrows(), self.matrix.ncols()),
                |acc, a| -> Result<CMatrix> {
                    let c = self.basis.coefficients(a)?;
                    Ok(acc + &c * c.adjoint())
                },
            )?;
            return Ok(Self::from_parts_unchecked(self.basis.clone(), chi, false));
        }

        let n = self.dim();
        let completeness = operators
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, a| acc + a.adjoint() * a);
        let q = numerics::herm_eig(&completeness)?;
        if q.min() <= 1e-12 {
            return Err(Error::InvalidKraus(
                "completeness matrix is singular; cannot renormalize".into(),
            ));
        }
        let inv_sqrt_diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            q.eigenvalues.iter().map(|&x| c64(1.0 / x.sqrt(), 0.0)),
        ));
        let q_inv_sqrt = &q.eigenvectors * inv_sqrt_diag * q.eigenvectors.adjoint();
        let rescaled: Vec<CMatrix> = operators.iter().map(|a| a * &q_inv_sqrt).collect();
        let kraus = KrausSet::with_validation(rescaled, true, Validation::Lenient)?;
        kraus_to_chi(&kraus, &self.basis)
    }
}

/// Expands each Kraus operator in `basis` and forms `χ_mn = Σ_i a_im a_in*`.
pub fn kraus_to_chi(op: &KrausSet, basis: &OperatorBasis) -> Result<ChiMatrix> {
    if op.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: op.dim(),
        });
    }
    let d = basis.len();
    let mut chi = CMatrix::zeros(d, d);
    for a in op.operators() {
        let coeffs = basis.coefficients(a)?;
        chi += &coeffs * coeffs.adjoint();
    }
    Ok(ChiMatrix::from_parts_unchecked(
        basis.clone(),
        chi,
        op.is_trace_preserving(),
    ))
}

pub fn chi_to_kraus(chi: &ChiMatrix) -> Result<KrausSet> {
    chi.to_kraus()
}

/// Rank of the real-linear map from Hermitian χ to `Σ χ_mn Ã_n†Ã_m`.
///
/// This is the number of independent real constraints trace preservation
/// imposes on χ.
#[allow(clippy::needless_range_loop)]
pub fn trace_constraint_rank(basis: &OperatorBasis) -> Result<usize> {
    let n = basis.dim();
    let d = basis.len();
    let ops = basis.operators();
    let products: Vec<Vec<CMatrix>> = (0..d)
        .map(|m| (0..d).map(|k| ops[k].adjoint() * &ops[m]).collect())
        .collect();

    let mut columns: Vec<CMatrix> = Vec::with_capacity(d * d);
    for m in 0..d {
        columns.push(products[m][m].clone());
        for k in m + 1..d {
            // χ = E_mk + E_km and χ = i(E_mk − E_km)
            columns.push(&products[m][k] + &products[k][m]);
            columns.push((&products[m][k] - &products[k][m]).map(|z| z * c64(0.0, 1.0)));
        }
    }
    let mut jacobian = DMatrix::<f64>::zeros(2 * n * n, columns.len());
    for (c, image) in columns.iter().enumerate() {
        for (r, z) in image.iter().enumerate() {
            jacobian[(2 * r, c)] = z.re;
            jacobian[(2 * r + 1, c)] = z.im;
        }
    }
    let s = jacobian.singular_values();
    let largest = s.iter().copied().fold(0.0, f64::max);
    Ok(s.iter().filter(|&&x| x > 1e-8 * largest).count())
}

/// Real parameters of a trace-preserving χ: `N⁴` minus the constraint rank.
pub fn independent_parameters(basis: &OperatorBasis) -> Result<usize> {
    Ok(basis.len() * basis.len() - trace_constraint_rank(basis)?)
}
