use crate::channel::{tolerance, ChiMatrix, OperatorBasis, Validation};
use crate::error::{Error, Result};
use crate::numerics::{self, from_real_rows, CMatrix, CVector};
use crate::pauli;

use super::simulate::TomographyDataset;
use super::states::StateBasis;

/// `β` as an `N⁴×N⁴` matrix: row `j·N² + k`, column `m·N² + n`, entry the
/// coefficient of `ρ_k` in `Ã_m ρ_j Ã_n†`.
#[derive(Debug, Clone)]
pub struct BetaTensor {
    dim: usize,
    matrix: CMatrix,
}

impl BetaTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, j: usize, k: usize, m: usize, n: usize) -> numerics::C64 {
        let d = self.dim * self.dim;
        self.matrix[(j * d + k, m * d + n)]
    }
}

/// `λ_jk` with `E(ρ_j) = Σ_k λ_jk ρ_k`, stored as an `N²×N²` matrix.
#[derive(Debug, Clone)]
pub struct LambdaMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl LambdaMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Row-major flattening, index `j·N² + k`.
    pub fn as_vector(&self) -> CVector {
        let d = self.matrix.nrows();
        CVector::from_fn(d * d, |i, _| self.matrix[(i / d, i % d)])
    }
}

pub fn compute_beta(basis: &OperatorBasis, states: &StateBasis) -> Result<BetaTensor> {
    if basis.dim() != states.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: states.dim(),
        });
    }
    let d = basis.len();
    let ops = basis.operators();
    let adj: Vec<CMatrix> = ops.iter().map(|a| a.adjoint()).collect();
    let mut matrix = CMatrix::zeros(d * d, d * d);
    for (j, rho) in states.elements().iter().enumerate() {
        for (m, am) in ops.iter().enumerate() {
            let left = am * rho;
            for (n, an) in adj.iter().enumerate() {
                let c = states.coefficients(&(&left * an))?;
                for k in 0..d {
                    matrix[(j * d + k, m * d + n)] = c[k];
                }
            }
        }
    }
    Ok(BetaTensor {
        dim: basis.dim(),
        matrix,
    })
}

pub fn compute_lambda(data: &TomographyDataset, states: &StateBasis) -> Result<LambdaMatrix> {
    if data.dim() != states.dim() {
        return Err(Error::DimensionMismatch {
            expected: states.dim(),
            found: data.dim(),
        });
    }
    let d = states.len();
    if data.records().len() != d {
        return Err(Error::IncompleteDataset(format!(
            "expected {d} records, found {}",
            data.records().len()
        )));
    }
    let mut matrix = CMatrix::zeros(d, d);
    for (j, record) in data.records().iter().enumerate() {
        let c = states.coefficients(record)?;
        matrix.set_row(j, &c.transpose());
    }
    Ok(LambdaMatrix {
        dim: data.dim(),
        matrix,
    })
}

/// A reconstructed χ together with the linear-system residual
/// `‖βχ⃗ − λ⃗‖`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub chi: ChiMatrix,
    pub residual: f64,
}

/// Holds `β` and `κ = β⁺` so repeated reconstructions share one SVD.
#[derive(Debug, Clone)]
pub struct ChiSolver {
    basis: OperatorBasis,
    beta: BetaTensor,
    kappa: CMatrix,
}

impl ChiSolver {
    pub fn new(basis: OperatorBasis, beta: BetaTensor) -> Result<Self> {
        if basis.dim() != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: beta.dim(),
            });
        }
        let kappa = numerics::pseudo_inverse(beta.matrix())?;
        Ok(Self { basis, beta, kappa })
    }

    /// Default operator basis with the projector state basis.
    pub fn for_dim(dim: usize) -> Result<Self> {
        let basis = OperatorBasis::default_for_dim(dim);
        let beta = compute_beta(&basis, &StateBasis::projectors(dim))?;
        Self::new(basis, beta)
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn beta(&self) -> &BetaTensor {
        &self.beta
    }

    pub fn kappa(&self) -> &CMatrix {
        &self.kappa
    }

    /// `χ⃗ = κλ⃗`, Hermitized. The trace-preservation flag is set when the
    /// result satisfies the trace condition; strict validation additionally
    /// demands positivity.
    pub fn solve(&self, lambda: &LambdaMatrix, validation: Validation) -> Result<Reconstruction> {
        if lambda.dim() != self.beta.dim {
            return Err(Error::DimensionMismatch {
                expected: self.beta.dim,
                found: lambda.dim(),
            });
        }
        let lv = lambda.as_vector();
        let chi_vec = &self.kappa * &lv;
        let residual = (self.beta.matrix() * &chi_vec - &lv).norm();
        let bound = 1e-8 * (1.0 + lv.norm());
        if residual > bound {
            return Err(Error::InconsistentData { residual, bound });
        }
        let d = self.basis.len();
        let raw = CMatrix::from_fn(d, d, |m, n| chi_vec[m * d + n]);
        let chi = finish(self.basis.clone(), raw, validation)?;
        Ok(Reconstruction { chi, residual })
    }

    /// Full pipeline from a dataset in the projector state basis.
    pub fn reconstruct(
        &self,
        data: &TomographyDataset,
        validation: Validation,
    ) -> Result<Reconstruction> {
        let lambda = compute_lambda(data, &StateBasis::projectors(data.dim()))?;
        self.solve(&lambda, validation)
    }
}

/// `χ⃗ = κλ⃗` with `κ = β⁺`; lenient validation.
pub fn reconstruct_chi(
    beta: &BetaTensor,
    lambda: &LambdaMatrix,
    basis: &OperatorBasis,
) -> Result<ChiMatrix> {
    let solver = ChiSolver::new(basis.clone(), beta.clone())?;
    Ok(solver.solve(lambda, Validation::Lenient)?.chi)
}

fn finish(basis: OperatorBasis, raw: CMatrix, validation: Validation) -> Result<ChiMatrix> {
    let chi = numerics::hermitian_part(&raw);
    let probe = ChiMatrix::from_parts_unchecked(basis.clone(), chi.clone(), true);
    let tp = probe.trace_preservation_defect() <= tolerance::CHI_TRACE;
    ChiMatrix::new(basis, chi, tp, validation)
}

/// `Λ = ½ [[I, σx], [σx, −I]]`.
pub fn lambda_1q() -> CMatrix {
    from_real_rows(&[
        &[1.0, 0.0, 0.0, 1.0],
        &[0.0, 1.0, 1.0, 0.0],
        &[0.0, 1.0, -1.0, 0.0],
        &[1.0, 0.0, 0.0, -1.0],
    ])
    .unscale(2.0)
}

/// `Λ₂ = Λ ⊗ Λ`.
pub fn lambda_2q() -> CMatrix {
    let l = lambda_1q();
    l.kronecker(&l)
}

/// `P = I₂ ⊗ S ⊗ I₂` where `S` swaps the middle two of four basis states.
pub fn permutation_2q() -> CMatrix {
    let swap = from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ]);
    let i2 = CMatrix::identity(2, 2);
    pauli::kron_all([&i2, &swap, &i2])
}

fn block_matrix(data: &TomographyDataset) -> CMatrix {
    let n = data.dim();
    let mut b = CMatrix::zeros(n * n, n * n);
    for (j, r) in data.records().iter().enumerate() {
        b.view_mut(((j / n) * n, (j % n) * n), (n, n)).copy_from(r);
    }
    b
}

/// `χ = Λ [[ρ′₁, ρ′₂], [ρ′₃, ρ′₄]] Λ` with `ρ′` the outputs for
/// `|0⟩⟨0|, |0⟩⟨1|, |1⟩⟨0|, |1⟩⟨1|`.
pub fn reconstruct_chi_closed_form_1q(data: &TomographyDataset) -> Result<ChiMatrix> {
    if data.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: data.dim(),
        });
    }
    let l = lambda_1q();
    let raw = &l * block_matrix(data) * &l;
    finish(OperatorBasis::standard(1), raw, Validation::Lenient)
}

/// `χ₂ = Λ₂ Pᵀ ρ̄′ P Λ₂` with `ρ̄′` the 4×4 arrangement of output blocks
/// for `|n⟩⟨m|`.
pub fn reconstruct_chi_closed_form_2q(data: &TomographyDataset) -> Result<ChiMatrix> {
    if data.dim() != 4 {
        return Err(Error::WrongDimension {
            expected: 4,
            found: data.dim(),
        });
    }
    let l = lambda_2q();
    let p = permutation_2q();
    let raw = &l * p.transpose() * block_matrix(data) * &p * &l;
    finish(OperatorBasis::standard(2), raw, Validation::Lenient)
}
