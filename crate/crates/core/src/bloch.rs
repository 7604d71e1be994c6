//! One-qubit channels as affine maps of the Bloch ball.
//!
//! A state `ρ = (I + λ⃗·σ⃗)/2` is sent to `λ⃗′ = Mλ⃗ + c⃗`. The map is
//! available two ways: read off the channel's action on axis states, or
//! summed from the Pauli coefficients of the Kraus operators. The polar
//! factors `M = OS` split it into a deformation `S` and a rotation `O`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::channel::{tolerance, DensityMatrix, KrausSet};
use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix, C64};
use crate::pauli;

/// `λ_k = tr(ρ σ_k)` for any 2×2 matrix (real part).
pub fn bloch_vector_of(m: &CMatrix) -> Result<Vector3<f64>> {
    if m.shape() != (2, 2) {
        return Err(Error::WrongDimension {
            expected: 2,
            found: m.nrows(),
        });
    }
    let [x, y, z] = pauli::sigmas();
    Ok(Vector3::new(
        (m * x).trace().re,
        (m * y).trace().re,
        (m * z).trace().re,
    ))
}

pub fn bloch_vector(rho: &DensityMatrix) -> Result<Vector3<f64>> {
    bloch_vector_of(rho.matrix())
}

/// `λ⃗ ↦ Mλ⃗ + c⃗`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub m: Matrix3<f64>,
    pub c: Vector3<f64>,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
            c: Vector3::zeros(),
        }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.m * v + self.c
    }

    /// The map of `next ∘ self`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        AffineMap {
            m: next.m * self.m,
            c: next.m * self.c + next.c,
        }
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.c.norm() <= tol
    }

    /// Largest `|Mλ⃗ + c⃗|` over a deterministic grid of unit vectors.
    pub fn max_image_norm(&self, grid: usize) -> f64 {
        sphere_grid(grid)
            .iter()
            .map(|v| self.apply(v).norm())
            .fold(0.0, f64::max)
    }
}

/// `grid × grid` unit vectors on a polar-angle/azimuth lattice.
pub(crate) fn sphere_grid(grid: usize) -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / grid as f64;
        for k in 0..grid {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
            out.push(Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ));
        }
    }
    out
}

fn check_qubit_channel(op: &KrausSet) -> Result<()> {
    if op.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: op.dim(),
        });
    }
    let defect = op.completeness_defect();
    if !op.is_trace_preserving() || defect > tolerance::KRAUS_COMPLETENESS {
        return Err(Error::NotTracePreserving { defect });
    }
    Ok(())
}

/// Reads `c⃗` from `E(I/2)` and column `k` of `M` from `E((I+σ_k)/2)`.
pub fn affine_from_channel(op: &KrausSet) -> Result<AffineMap> {
    check_qubit_channel(op)?;
    let half = CMatrix::identity(2, 2).unscale(2.0);
    let c = bloch_vector_of(&op.apply_linear(&half)?)?;
    let mut m = Matrix3::zeros();
    for (k, s) in pauli::sigmas().iter().enumerate() {
        let input = &half + s.unscale(2.0);
        let col = bloch_vector_of(&op.apply_linear(&input)?)? - c;
        m.set_column(k, &col);
    }
    Ok(AffineMap { m, c })
}

fn levi_civita(j: usize, k: usize, p: usize) -> f64 {
    match (j, k, p) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Sums the closed-form expressions for `M_jk` and `c_k` over the Kraus
/// operators written as `A_l = α_l I + Σ_k a_lk σ_k`.
#[allow(clippy::needless_range_loop)]
pub fn affine_from_coefficients(op: &KrausSet) -> Result<AffineMap> {
    check_qubit_channel(op)?;
    let sigmas = pauli::sigmas();
    let i = c64(0.0, 1.0);
    let mut m = [[C64::new(0.0, 0.0); 3]; 3];
    let mut c = [C64::new(0.0, 0.0); 3];
    for a in op.operators() {
        let alpha = a.trace() / 2.0;
        let coeffs: Vec<C64> = sigmas.iter().map(|s| (a * s).trace() / 2.0).collect();
        let norm2: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        for j in 0..3 {
            for k in 0..3 {
                let mut term = coeffs[j] * coeffs[k].conj() + coeffs[j].conj() * coeffs[k];
                if j == k {
                    term += alpha.norm_sqr() - norm2;
                }
                for p in 0..3 {
                    let eps = levi_civita(j, k, p);
                    if eps != 0.0 {
                        term += i * eps * (alpha * coeffs[p].conj() - alpha.conj() * coeffs[p]);
                    }
                }
                m[j][k] += term;
            }
        }
        for k in 0..3 {
            for j in 0..3 {
                for p in 0..3 {
                    let eps = levi_civita(j, p, k);
                    if eps != 0.0 {
                        c[k] += 2.0 * i * eps * coeffs[j] * coeffs[p].conj();
                    }
                }
            }
        }
    }
    Ok(AffineMap {
        m: Matrix3::from_fn(|j, k| m[j][k].re),
        c: Vector3::from_fn(|k, _| c[k].re),
    })
}

/// `M = O·S` with `O` a proper rotation and `S` symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarFactors {
    pub o: Matrix3<f64>,
    pub s: Matrix3<f64>,
}

pub fn polar_factors(map: &AffineMap) -> Result<PolarFactors> {
    let (o, s) = numerics::polar_decompose_real(&map.m)?;
    Ok(PolarFactors { o, s })
}

/// Geometric decoherence figures of an affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSummary {
    /// `|c⃗|`, the displacement of the ball's centre.
    pub displacement: f64,
    /// Singular values of `M`, descending.
    pub singular_values: [f64; 3],
    pub determinant: f64,
    /// Eigenvectors of `S` as columns, ordered by descending eigenvalue.
    pub deformation_axes: Matrix3<f64>,
    /// Eigenvalues of `S`, descending.
    pub deformation: [f64; 3],
}

pub fn decoherence_summary(map: &AffineMap) -> Result<DecoherenceSummary> {
    let mut sv: Vec<f64> = map.m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let factors = polar_factors(map)?;
    let eig = SymmetricEigen::new(factors.s);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes = Matrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    Ok(DecoherenceSummary {
        displacement: map.c.norm(),
        singular_values: [sv[0], sv[1], sv[2]],
        determinant: map.m.determinant(),
        deformation_axes: axes,
        deformation: [
            eig.eigenvalues[order[0]],
            eig.eigenvalues[order[1]],
            eig.eigenvalues[order[2]],
        ],
    })
}
