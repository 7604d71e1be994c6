//! Common channels and random channel generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{c64, from_real_rows, CMatrix};
use crate::pauli;

use super::KrausSet;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidKraus(format!("{name} = {p} outside [0, 1]")))
    }
}

/// `{√(1−3p/4) I, √(p/4) σx, √(p/4) σy, √(p/4) σz}`, i.e.
/// `E(ρ) = (1−p)ρ + p I/2`.
pub fn depolarizing(p: f64) -> Result<KrausSet> {
    check_probability("p", p)?;
    let a = (1.0 - 0.75 * p).sqrt();
    let b = (p / 4.0).sqrt();
    KrausSet::new(vec![
        pauli::identity().scale(a),
        pauli::sigma_x().scale(b),
        pauli::sigma_y().scale(b),
        pauli::sigma_z().scale(b),
    ])
}

/// `A_0 = |0⟩⟨0| + √(1−γ)|1⟩⟨1|`, `A_1 = √γ |0⟩⟨1|`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausSet> {
    check_probability("gamma", gamma)?;
    KrausSet::new(vec![
        from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]]),
        from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]),
    ])
}

/// `{√(1−q) I, √q σz}`.
pub fn phase_damping(q: f64) -> Result<KrausSet> {
    check_probability("q", q)?;
    KrausSet::new(vec![
        pauli::identity().scale((1.0 - q).sqrt()),
        pauli::sigma_z().scale(q.sqrt()),
    ])
}

/// Single-qubit rotation `exp(−iθσz/2)`.
pub fn z_rotation(theta: f64) -> CMatrix {
    let h = theta / 2.0;
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c64(h.cos(), -h.sin()),
        c64(h.cos(), h.sin()),
    ]))
}

/// Controlled-NOT with the first (most significant) qubit as control.
pub fn cnot() -> CMatrix {
    from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random trace-preserving channel with `rank` Kraus operators, cut from a
/// random isometry `N → rank·N`.
pub fn random_channel<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> KrausSet {
    assert!(rank >= 1, "rank must be positive");
    let g = gaussian_matrix(rank * dim, dim, rng);
    let q = g.qr().q();
    let operators = (0..rank)
        .map(|i| q.rows(i * dim, dim).into_owned())
        .collect();
    KrausSet::new(operators).expect("isometry blocks are complete")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unitarity_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn models_are_trace_preserving() {
        for op in [
            depolarizing(0.3).unwrap(),
            amplitude_damping(0.7).unwrap(),
            phase_damping(0.2).unwrap(),
        ] {
            assert!(op.completeness_defect() < 1e-15);
        }
        assert!(depolarizing(1.5).is_err());
    }

    #[test]
    fn random_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(unitarity_defect(&random_unitary(5, &mut rng)) < 1e-13);
        let op = random_channel(4, 3, &mut rng);
        assert_eq!(op.len(), 3);
        assert!(op.completeness_defect() < 1e-13);
        assert!(unitarity_defect(&cnot()) < 1e-15);
        assert!(unitarity_defect(&z_rotation(0.3)) < 1e-15);
    }
}
