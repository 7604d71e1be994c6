//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Tolerances are relative to
//! the Frobenius norm of the input; absolute thresholds only kick in for
//! zero-norm inputs. Vectorization is column stacking throughout, which
//! matches nalgebra's column-major storage.

use nalgebra::{DMatrix, DVector, Matrix3, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative hermiticity tolerance accepted by [`herm_eig`].
pub const HERMITIAN_RTOL: f64 = 1e-8;
/// Singular values below this fraction of the largest are treated as zero.
pub const PINV_RCOND: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;
const EIGEN_MAX_ITER: usize = 10_000;
// nalgebra misreports converged factors when asked for a bare machine epsilon.
const DECOMP_EPS: f64 = 5.0 * f64::EPSILON;
const SINGULAR_RTOL: f64 = 1e-12;
const BRANCH_CUT_RTOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (|m - m^H|_F = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue {re:.6}{im:+.3e}i lies on the closed negative real axis")]
    BranchCutEigenvalue { re: f64, im: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("empty matrix")]
    Empty,
}

type Result<T> = std::result::Result<T, NumericsError>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a matrix from row-major rows.
pub fn from_rows(rows: &[&[C64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Builds a complex matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(NumericsError::Empty);
    }
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Frobenius norm of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Column-stacking vectorization, `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, v.len() / rows, v.as_slice())
}

/// `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    /// `V · diag(d) · V†`.
    pub fn reassemble(&self) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            self.eigenvalues.iter().map(|&x| c64(x, 0.0)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

/// Hermitian eigendecomposition.
///
/// The input must be Hermitian to within `1e-8 · ‖m‖_F`; it is symmetrized
/// before diagonalization so tiny skew parts never leak into the result.
pub fn herm_eig(m: &CMatrix) -> Result<HermitianEigen> {
    check_finite(m)?;
    check_square(m)?;
    let norm = m.norm();
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_RTOL * norm.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(NumericsError::NotHermitian { defect });
    }
    let h = hermitian_part(m);
    let eig = SymmetricEigen::try_new(h, DECOMP_EPS, EIGEN_MAX_ITER)
        .ok_or(NumericsError::ConvergenceFailure("Hermitian eigensolver"))?;

    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let svd = SVD::try_new(m.clone(), false, false, DECOMP_EPS, EIGEN_MAX_ITER)
        .ok_or(NumericsError::ConvergenceFailure("SVD"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of singular values above `rcond` times the largest one.
pub fn numerical_rank(m: &CMatrix, rcond: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let largest = s.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rcond * largest).count())
}

/// Moore–Penrose pseudoinverse with the default rank cutoff.
pub fn pseudo_inverse(m: &CMatrix) -> Result<CMatrix> {
    pseudo_inverse_with_cutoff(m, PINV_RCOND)
}

pub fn pseudo_inverse_with_cutoff(m: &CMatrix, rcond: f64) -> Result<CMatrix> {
    check_finite(m)?;
    let svd = SVD::try_new(m.clone(), true, true, DECOMP_EPS, EIGEN_MAX_ITER)
        .ok_or(NumericsError::ConvergenceFailure("SVD"))?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let largest = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);

    let mut kappa = CMatrix::zeros(m.ncols(), m.nrows());
    if largest == 0.0 {
        return Ok(kappa);
    }
    let cutoff = rcond * largest;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            // V[:,k] · (1/s) · U[:,k]†
            let v_col = v_t.row(k).adjoint();
            let u_row = u.column(k).adjoint();
            kappa += (v_col * u_row).scale(1.0 / s);
        }
    }
    Ok(kappa)
}

/// Matrix exponential.
pub fn matrix_exp(m: &CMatrix) -> Result<CMatrix> {
    check_finite(m)?;
    check_square(m)?;
    Ok(m.clone().exp())
}

/// Principal matrix logarithm.
///
/// Uses a complex Schur form followed by inverse scaling and squaring:
/// triangular square roots are taken until the factor is close to the
/// identity, the Mercator series is summed there, and the result is scaled
/// back by the number of square roots. Repeated eigenvalues are fine; inputs
/// with an eigenvalue on the closed negative real axis are refused.
pub fn matrix_log(m: &CMatrix) -> Result<CMatrix> {
    check_finite(m)?;
    let n = check_square(m)?;
    let scale = m.norm();
    if scale == 0.0 {
        return Err(NumericsError::Singular);
    }
    let (q, mut t) = Schur::try_new(m.clone(), DECOMP_EPS, SCHUR_MAX_ITER)
        .ok_or(NumericsError::ConvergenceFailure("Schur decomposition"))?
        .unpack();

    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
        let lambda = t[(i, i)];
        if lambda.norm() <= SINGULAR_RTOL * scale {
            return Err(NumericsError::Singular);
        }
        if lambda.re < 0.0 && lambda.im.abs() <= BRANCH_CUT_RTOL * lambda.norm() {
            return Err(NumericsError::BranchCutEigenvalue {
                re: lambda.re,
                im: lambda.im,
            });
        }
    }

    let identity = CMatrix::identity(n, n);
    let mut roots = 0u32;
    while (&t - &identity).norm() > 0.25 {
        t = upper_triangular_sqrt(&t)?;
        roots += 1;
        if roots > 64 {
            return Err(NumericsError::ConvergenceFailure(
                "inverse scaling and squaring",
            ));
        }
    }
    let log_t = log1p_series(&(t - identity))?.scale(2f64.powi(roots as i32));
    Ok(&q * log_t * q.adjoint())
}

/// Principal square root of an upper-triangular matrix.
fn upper_triangular_sqrt(t: &CMatrix) -> Result<CMatrix> {
    let n = t.nrows();
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for j in 1..n {
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let denom = r[(i, i)] + r[(j, j)];
            if denom.norm() == 0.0 {
                return Err(NumericsError::Singular);
            }
            r[(i, j)] = s / denom;
        }
    }
    Ok(r)
}

/// `log(I + x)` by its power series; requires `‖x‖_F ≤ 0.25`.
fn log1p_series(x: &CMatrix) -> Result<CMatrix> {
    let mut power = x.clone();
    let mut sum = x.clone();
    for k in 2..400 {
        power = &power * x;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let term = power.scale(sign / k as f64);
        let small = term.norm() <= 1e-18 * sum.norm().max(1.0);
        sum += term;
        if small {
            return Ok(sum);
        }
    }
    Err(NumericsError::ConvergenceFailure("logarithm series"))
}

/// Polar decomposition `m = O·S` of a real 3×3 matrix with `det O = +1`.
///
/// When `det m < 0` the reflection is pushed into `S` (along the direction of
/// the smallest singular value), so `S` is symmetric but may be indefinite.
pub fn polar_decompose_real(m: &Matrix3<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let svd = m
        .try_svd(true, true, DECOMP_EPS, EIGEN_MAX_ITER)
        .ok_or(NumericsError::ConvergenceFailure("SVD"))?;
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = svd.singular_values;

    let mut d = Matrix3::from_diagonal(&sigma);
    if (u * v_t).determinant() < 0.0 {
        let k = sigma.imin();
        u.column_mut(k).neg_mut();
        d[(k, k)] = -d[(k, k)];
    }
    let rotation = u * v_t;
    let deformation = v_t.transpose() * d * v_t;
    let deformation = (deformation + deformation.transpose()) * 0.5;
    Ok((rotation, deformation))
}

/// Shannon entropy in bits of a probability vector; `0 · log 0 = 0`.
pub fn entropy_bits(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits.
///
/// Accepts matrices that are Hermitian, unit-trace and positive to within
/// `1e-9`; small negative eigenvalues are clamped to zero.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    const TOL: f64 = 1e-9;
    check_finite(rho)?;
    check_square(rho)?;
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > TOL || trace.im.abs() > TOL {
        return Err(NumericsError::InvalidDensityMatrix(format!(
            "trace {trace} differs from 1"
        )));
    }
    let defect = hermiticity_defect(rho);
    if defect > TOL {
        return Err(NumericsError::InvalidDensityMatrix(format!(
            "hermiticity defect {defect:.3e}"
        )));
    }
    let eig = herm_eig(rho)?;
    if eig.min() < -TOL {
        return Err(NumericsError::InvalidDensityMatrix(format!(
            "negative eigenvalue {:.3e}",
            eig.min()
        )));
    }
    Ok(spectrum_entropy(&eig.eigenvalues))
}

/// Entropy in bits of a (clamped, renormalized) spectrum.
pub(crate) fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let clamped: Vec<f64> = eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let n = clamped.len() as f64;
    let p: Vec<f64> = clamped.iter().map(|&x| x / total).collect();
    entropy_bits(&p).clamp(0.0, n.log2())
}
