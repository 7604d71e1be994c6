use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix};

use super::{tolerance, DensityMatrix, Superoperator, Validation};

/// Operator-sum representation `E(ρ) = Σ_i A_i ρ A_i†`.
///
/// Trace-preserving sets satisfy `Σ A_i†A_i = I`; selective sets (one outcome
/// of a measurement) only satisfy `Σ A_i†A_i ≤ I`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<CMatrix>,
    trace_preserving: bool,
}

impl KrausSet {
    /// Trace-preserving set; fails unless `Σ A_i†A_i = I` within `1e-9`.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        Self::with_validation(operators, true, Validation::Strict)
    }

    /// Selective (non-trace-preserving) set with `Σ A_i†A_i ≤ I`.
    pub fn selective(operators: Vec<CMatrix>) -> Result<Self> {
        Self::with_validation(operators, false, Validation::Strict)
    }

    pub fn with_validation(
        operators: Vec<CMatrix>,
        trace_preserving: bool,
        validation: Validation,
    ) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidKraus("empty operator list".into()))?;
        let dim = first.nrows();
        for a in &operators {
            numerics::check_finite(a)?;
            if a.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if a.nrows() != dim {
                        a.nrows()
                    } else {
                        a.ncols()
                    },
                });
            }
        }
        let set = Self {
            dim,
            operators,
            trace_preserving,
        };
        let tol = tolerance::KRAUS_COMPLETENESS * validation.factor();
        if trace_preserving {
            let defect = set.completeness_defect();
            if defect > tol {
                return Err(Error::NotTracePreserving { defect });
            }
        } else {
            let gap = CMatrix::identity(dim, dim) - set.completeness();
            let min = numerics::herm_eig(&gap)?.min();
            if min < -tol {
                return Err(Error::InvalidKraus(format!(
                    "sum of A†A exceeds the identity by {:.3e}",
                    -min
                )));
            }
        }
        Ok(set)
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            operators: vec![CMatrix::identity(dim, dim)],
            trace_preserving: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ A_i†A_i`.
    pub fn completeness(&self) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                acc + a.adjoint() * a
            })
    }

    /// `‖Σ A_i†A_i − I‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        (self.completeness() - CMatrix::identity(self.dim, self.dim)).norm()
    }

    /// `Σ A_i X A_i†` for an arbitrary (not necessarily physical) `X`.
    pub fn apply_linear(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                acc + a * x * a.adjoint()
            })
    }

    /// Applies the operation and renormalizes.
    ///
    /// Returns the normalized output and its weight `tr E(ρ)`, which is the
    /// outcome probability for a selective operation.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        let out = self.apply_linear(rho.matrix())?;
        let weight = out.trace().re;
        if weight <= tolerance::ZERO_WEIGHT {
            return Err(Error::ZeroWeight(weight));
        }
        let normalized = numerics::hermitian_part(&out).unscale(weight);
        let state = DensityMatrix::with_validation(normalized, Validation::Lenient)?;
        Ok((state, weight))
    }

    /// Remixes the Kraus index: `A'_i = Σ_j V_ij A_j` for a unitary `V`.
    pub fn remix(&self, v: &CMatrix) -> Result<Self> {
        let k = self.len();
        if v.shape() != (k, k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: v.nrows(),
            });
        }
        let defect = numerics::unitarity_defect(v);
        if defect > 1e-9 {
            return Err(Error::NotUnitary { defect });
        }
        let operators = (0..k)
            .map(|i| {
                (0..k).fold(CMatrix::zeros(self.dim, self.dim), |acc, j| {
                    acc + self.operators[j].map(|z| z * v[(i, j)])
                })
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            operators,
            trace_preserving: self.trace_preserving,
        })
    }

    /// The composition `next ∘ self`.
    pub fn then(&self, next: &KrausSet) -> Result<Self> {
        if next.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: next.dim,
            });
        }
        let operators = next
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .collect();
        Ok(Self {
            dim: self.dim,
            operators,
            trace_preserving: self.trace_preserving && next.trace_preserving,
        })
    }

    /// The product channel `self ⊗ other`.
    pub fn tensor(&self, other: &KrausSet) -> Self {
        let operators = self
            .operators
            .iter()
            .flat_map(|a| other.operators.iter().map(move |b| a.kronecker(b)))
            .collect();
        Self {
            dim: self.dim * other.dim,
            operators,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        }
    }

    pub fn to_superoperator(&self) -> Superoperator {
        Superoperator::from_kraus(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::models;
    use crate::numerics::{c64, from_real_rows, CVector};
    use crate::pauli;

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&CVector::from_vec(vec![c64(s, 0.0), c64(s, 0.0)])).unwrap()
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = plus();
        let (out, w) = KrausSet::identity(2).apply(&rho).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        assert!((out.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn full_amplitude_damping_resets_to_ground() {
        let op = models::amplitude_damping(1.0).unwrap();
        let (out, w) = op.apply(&DensityMatrix::basis_state(2, 1)).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        assert!((out.matrix() - DensityMatrix::basis_state(2, 0).matrix()).norm() < 1e-15);
    }

    #[test]
    fn selective_projection_reports_probability() {
        let p0 = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let op = KrausSet::selective(vec![p0]).unwrap();
        let (out, w) = op.apply(&plus()).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        assert!((out.matrix() - DensityMatrix::basis_state(2, 0).matrix()).norm() < 1e-15);
        assert!(matches!(
            op.apply(&DensityMatrix::basis_state(2, 1)),
            Err(Error::ZeroWeight(_))
        ));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(KrausSet::new(vec![]), Err(Error::InvalidKraus(_))));
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(
            KrausSet::new(vec![half.clone()]),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(KrausSet::selective(vec![half]).is_ok());
        let big = CMatrix::identity(2, 2).scale(1.1);
        assert!(matches!(
            KrausSet::selective(vec![big]),
            Err(Error::InvalidKraus(_))
        ));
        let mixed = vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)];
        assert!(matches!(
            KrausSet::new(mixed),
            Err(Error::DimensionMismatch { .. })
        ));
        let rho3 = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            KrausSet::identity(2).apply(&rho3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn composition_and_tensor_are_trace_preserving() {
        let a = models::depolarizing(0.3).unwrap();
        let b = models::amplitude_damping(0.4).unwrap();
        assert!(a.then(&b).unwrap().completeness_defect() < 1e-14);
        let t = a.tensor(&b);
        assert_eq!(t.dim(), 4);
        assert!(t.completeness_defect() < 1e-14);
        let x = KrausSet::unitary(pauli::sigma_x()).unwrap();
        let xx = x.then(&x).unwrap();
        assert!((xx.operators()[0].clone() - CMatrix::identity(2, 2)).norm() < 1e-15);
    }
}
