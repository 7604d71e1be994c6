use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix};

use super::{tolerance, ChiMatrix, KrausSet, OperatorBasis};

/// Matrix `L` with `vec(E(ρ)) = L · vec(ρ)` under column stacking.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    /// Wraps an `N²×N²` matrix after checking it maps Hermitian matrices to
    /// Hermitian matrices on the Hermitian matrix-unit probe set.
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        let d = dim * dim;
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let sup = Self { dim, matrix };
        let tol = tolerance::HERMITICITY_PRESERVING * (1.0 + sup.matrix.norm());
        for probe in hermitian_probes(dim) {
            let out = sup.apply_unchecked(&probe);
            let defect = numerics::hermiticity_defect(&out);
            if defect > tol {
                return Err(Error::Malformed(format!(
                    "superoperator does not preserve hermiticity (defect {defect:.3e})"
                )));
            }
        }
        Ok(sup)
    }

    pub(crate) fn from_matrix_unchecked(dim: usize, matrix: CMatrix) -> Self {
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        let d = dim * dim;
        Self {
            dim,
            matrix: CMatrix::identity(d, d),
        }
    }

    /// `Σ_i conj(A_i) ⊗ A_i`.
    pub fn from_kraus(op: &KrausSet) -> Self {
        let d = op.dim() * op.dim();
        let matrix = op.operators().iter().fold(CMatrix::zeros(d, d), |acc, a| {
            acc + a.conjugate().kronecker(a)
        });
        Self {
            dim: op.dim(),
            matrix,
        }
    }

    /// `Σ_mn χ_mn conj(Ã_n) ⊗ Ã_m`.
    pub fn from_chi(chi: &ChiMatrix) -> Self {
        let n = chi.dim();
        let d = n * n;
        let ops = chi.basis().operators();
        let conj: Vec<CMatrix> = ops.iter().map(|a| a.conjugate()).collect();
        let mut matrix = CMatrix::zeros(d, d);
        for (m, am) in ops.iter().enumerate() {
            for (k, ak) in conj.iter().enumerate() {
                let c = chi.matrix()[(m, k)];
                if c.norm() != 0.0 {
                    matrix += ak.kronecker(am).map(|z| z * c);
                }
            }
        }
        Self { dim: n, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        numerics::unvectorize(&(&self.matrix * numerics::vectorize(x)), self.dim)
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Superoperator) -> Result<Self> {
        if after.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: after.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            matrix: &after.matrix * &self.matrix,
        })
    }

    /// `‖vec(I)† L − vec(I)†‖`, zero exactly when the map preserves trace.
    pub fn trace_preservation_defect(&self) -> f64 {
        let id = numerics::vectorize(&CMatrix::identity(self.dim, self.dim));
        (id.adjoint() * &self.matrix - id.adjoint()).norm()
    }

    /// χ relative to `basis`, solving `L = Σ χ_mn conj(Ã_n) ⊗ Ã_m`.
    ///
    /// The result is Hermitized but otherwise unvalidated; callers decide
    /// whether positivity matters.
    pub fn to_chi(&self, basis: &OperatorBasis) -> Result<ChiMatrix> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.dim(),
            });
        }
        let d = basis.len();
        let ops = basis.operators();
        let mut design = CMatrix::zeros(d * d, d * d);
        for m in 0..d {
            for k in 0..d {
                let col = ops[k].conjugate().kronecker(&ops[m]);
                design.set_column(m * d + k, &numerics::vectorize(&col));
            }
        }
        let solution = numerics::pseudo_inverse(&design)? * numerics::vectorize(&self.matrix);
        let chi = CMatrix::from_fn(d, d, |m, k| solution[m * d + k]);
        let chi = numerics::hermitian_part(&chi);
        let trace_preserving = self.trace_preservation_defect() <= tolerance::CHI_TRACE;
        Ok(ChiMatrix::from_parts_unchecked(
            basis.clone(),
            chi,
            trace_preserving,
        ))
    }

    pub fn distance(&self, other: &Superoperator) -> Result<f64> {
        channel_distance(self, other)
    }
}

/// Frobenius norm of the difference of two superoperators.
pub fn channel_distance(a: &Superoperator, b: &Superoperator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok((&a.matrix - &b.matrix).norm())
}

fn hermitian_probes(dim: usize) -> Vec<CMatrix> {
    let mut probes = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in i..dim {
            let mut m = CMatrix::zeros(dim, dim);
            if i == j {
                m[(i, i)] = c64(1.0, 0.0);
                probes.push(m);
            } else {
                m[(i, j)] = c64(1.0, 0.0);
                m[(j, i)] = c64(1.0, 0.0);
                probes.push(m.clone());
                m[(i, j)] = c64(0.0, 1.0);
                m[(j, i)] = c64(0.0, -1.0);
                probes.push(m);
            }
        }
    }
    probes
}
