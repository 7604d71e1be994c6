//! Pauli matrices and their tensor products.

use crate::numerics::{c64, from_rows, CMatrix};

pub fn identity() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn sigma_x() -> CMatrix {
    from_rows(&[
        &[c64(0.0, 0.0), c64(1.0, 0.0)],
        &[c64(1.0, 0.0), c64(0.0, 0.0)],
    ])
}

pub fn sigma_y() -> CMatrix {
    from_rows(&[
        &[c64(0.0, 0.0), c64(0.0, -1.0)],
        &[c64(0.0, 1.0), c64(0.0, 0.0)],
    ])
}

pub fn sigma_z() -> CMatrix {
    from_rows(&[
        &[c64(1.0, 0.0), c64(0.0, 0.0)],
        &[c64(0.0, 0.0), c64(-1.0, 0.0)],
    ])
}

/// `[σx, σy, σz]`.
pub fn sigmas() -> [CMatrix; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Single-qubit factor by index: 0 → I, 1 → X, 2 → Y, 3 → Z.
pub fn single(index: usize) -> CMatrix {
    match index {
        0 => identity(),
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// Kronecker product of a sequence of matrices, left factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Base-4 digits of `index` over `n_qubits` positions, most significant first.
pub fn digits(index: usize, n_qubits: usize) -> Vec<usize> {
    (0..n_qubits)
        .rev()
        .map(|pos| (index / 4usize.pow(pos as u32)) % 4)
        .collect()
}

/// All `4^k` Pauli strings in lexicographic order (string 0 is the identity).
pub fn strings(n_qubits: usize) -> Vec<CMatrix> {
    (0..4usize.pow(n_qubits as u32))
        .map(|i| {
            let factors: Vec<CMatrix> = digits(i, n_qubits).into_iter().map(single).collect();
            kron_all(&factors)
        })
        .collect()
}

/// `Some(k)` when `dim == 2^k`.
pub fn qubit_count(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim >= 2).then(|| dim.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra() {
        let [x, y, z] = sigmas();
        let i = c64(0.0, 1.0);
        assert!((&x * &y - z.map(|v| v * i)).norm() < 1e-15);
        assert!((&x * &x - identity()).norm() < 1e-15);
    }

    #[test]
    fn strings_are_ordered_lexicographically() {
        let s = strings(2);
        assert_eq!(s.len(), 16);
        assert!((&s[6] - sigma_x().kronecker(&sigma_y())).norm() < 1e-15);
        assert_eq!(digits(6, 2), vec![1, 2]);
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(qubit_count(2), Some(1));
        assert_eq!(qubit_count(8), Some(3));
        assert_eq!(qubit_count(3), None);
        assert_eq!(qubit_count(1), None);
    }
}
