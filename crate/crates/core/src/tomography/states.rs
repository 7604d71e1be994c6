use crate::channel::Expansion;
use crate::error::{Error, Result};
use crate::numerics::{c64, CMatrix, CVector, C64};

/// Ordered set of `N²` linearly independent matrices `ρ_j` in which channel
/// outputs are expanded. Elements need not be density matrices.
#[derive(Debug, Clone)]
pub struct StateBasis {
    elements: Vec<CMatrix>,
    expansion: Expansion,
}

impl StateBasis {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let expansion = Expansion::new(&elements)?;
        Ok(Self {
            elements,
            expansion,
        })
    }

    /// `|n⟩⟨m|` in row-major `(n, m)` order.
    pub fn projectors(dim: usize) -> Self {
        assert!(dim >= 2, "state basis needs dim >= 2");
        let elements = (0..dim * dim)
            .map(|j| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(j / dim, j % dim)] = c64(1.0, 0.0);
                m
            })
            .collect();
        Self::new(elements).expect("matrix units are independent")
    }

    pub fn dim(&self) -> usize {
        self.expansion.dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn get(&self, j: usize) -> &CMatrix {
        &self.elements[j]
    }

    /// `c_k` with `x = Σ_k c_k ρ_k`.
    pub fn coefficients(&self, x: &CMatrix) -> Result<CVector> {
        self.expansion.coefficients(x)
    }
}

pub fn projector_state_basis(dim: usize) -> StateBasis {
    StateBasis::projectors(dim)
}

/// The physical inputs behind the projector state basis and the linear
/// combinations that turn their outputs into `E(|n⟩⟨m|)`.
///
/// There are `N²` pure preparations, indexed like the projectors:
/// `j = n·N + m` prepares `|n⟩` when `n = m`, `(|n⟩ + |m⟩)/√2` when `n < m`,
/// and `(|m⟩ + i|n⟩)/√2` when `n > m`. For `a < b`, with `P₊` and `P₋` the
/// two superposition preparations of the pair,
///
/// ```text
/// E(|a⟩⟨b|) = E(P₊) + i·E(P₋) − (1+i)/2 · (E(|a⟩⟨a|) + E(|b⟩⟨b|))
/// E(|b⟩⟨a|) = E(P₊) − i·E(P₋) − (1−i)/2 · (E(|a⟩⟨a|) + E(|b⟩⟨b|))
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparationRecipe {
    dim: usize,
}

impl PreparationRecipe {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "recipe needs dim >= 2");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// State vector of preparation `j`.
    pub fn preparation(&self, j: usize) -> CVector {
        let n = self.dim;
        let (a, b) = (j / n, j % n);
        let mut psi = CVector::zeros(n);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => psi[a] = c64(1.0, 0.0),
            std::cmp::Ordering::Less => {
                psi[a] = c64(s, 0.0);
                psi[b] = c64(s, 0.0);
            }
            std::cmp::Ordering::Greater => {
                psi[b] = c64(s, 0.0);
                psi[a] = c64(0.0, s);
            }
        }
        psi
    }

    pub fn preparations(&self) -> Vec<CVector> {
        (0..self.len()).map(|j| self.preparation(j)).collect()
    }

    /// Terms `(preparation index, coefficient)` assembling basis element `j`.
    pub fn terms(&self, j: usize) -> Vec<(usize, C64)> {
        let n = self.dim;
        let (row, col) = (j / n, j % n);
        if row == col {
            return vec![(j, c64(1.0, 0.0))];
        }
        let (a, b) = (row.min(col), row.max(col));
        let plus = a * n + b;
        let minus = b * n + a;
        let diag = [a * n + a, b * n + b];
        // +1 for |a⟩⟨b|, −1 for |b⟩⟨a|
        let sign = if row < col { 1.0 } else { -1.0 };
        let shift = c64(-0.5, -0.5 * sign);
        vec![
            (plus, c64(1.0, 0.0)),
            (minus, c64(0.0, sign)),
            (diag[0], shift),
            (diag[1], shift),
        ]
    }

    /// Combines per-preparation outputs (indexed like the preparations) into
    /// outputs for each state-basis element.
    pub fn assemble(&self, outputs: &[CMatrix]) -> Result<Vec<CMatrix>> {
        if outputs.len() != self.len() {
            return Err(Error::IncompleteDataset(format!(
                "expected {} preparation outputs, found {}",
                self.len(),
                outputs.len()
            )));
        }
        let n = outputs[0].nrows();
        Ok((0..self.len())
            .map(|j| {
                self.terms(j)
                    .into_iter()
                    .fold(CMatrix::zeros(n, n), |acc, (k, c)| {
                        acc + outputs[k].map(|z| z * c)
                    })
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::from_real_rows;

    #[test]
    fn one_qubit_projectors() {
        let b = projector_state_basis(2);
        assert_eq!(b.len(), 4);
        assert_eq!(b.get(1), &from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(b.get(2), &from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(projector_state_basis(4).len(), 16);
    }

    #[test]
    fn recipe_reproduces_projectors_under_identity() {
        for dim in [2, 3, 4] {
            let recipe = PreparationRecipe::new(dim);
            let outputs: Vec<CMatrix> = recipe
                .preparations()
                .iter()
                .map(|psi| psi * psi.adjoint())
                .collect();
            let assembled = recipe.assemble(&outputs).unwrap();
            let basis = projector_state_basis(dim);
            for (j, x) in assembled.iter().enumerate() {
                assert!((x - basis.get(j)).norm() < 1e-15, "dim {dim}, j {j}");
            }
        }
    }

    #[test]
    fn preparations_are_normalized() {
        let recipe = PreparationRecipe::new(3);
        for psi in recipe.preparations() {
            assert!((psi.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn incomplete_outputs_rejected() {
        let recipe = PreparationRecipe::new(2);
        let outputs = vec![CMatrix::identity(2, 2); 3];
        assert!(matches!(
            recipe.assemble(&outputs),
            Err(Error::IncompleteDataset(_))
        ));
    }
}
