use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::KrausSet;
use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix};
use crate::pauli;

use super::states::PreparationRecipe;

/// Exact expectation values or a finite number of single-shot samples per
/// observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        // accept 1e4-style counts as well as plain integers
        let n: f64 = s
            .parse()
            .map_err(|_| Error::Malformed(format!("invalid shot count {s:?}")))?;
        if n < 1.0 || n.fract() != 0.0 || n > u64::MAX as f64 {
            return Err(Error::Malformed(format!("invalid shot count {s:?}")));
        }
        Ok(Shots::Count(n as u64))
    }
}

// JSON form: a positive integer or the string "exact".
impl serde::Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("shot count must be positive")),
            Raw::Count(n) => Ok(Shots::Count(n)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Deterministic per-record seed, independent of evaluation order.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index))
}

pub(crate) fn record_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, index as u64))
}

/// `⟨P⟩ = tr(ρP)` for every non-identity Pauli string, in lexicographic order.
pub fn pauli_expectations(rho: &CMatrix) -> Result<Vec<f64>> {
    let k = pauli::qubit_count(rho.nrows()).ok_or(Error::NotQubitDimension(rho.nrows()))?;
    Ok(pauli::strings(k)
        .iter()
        .skip(1)
        .map(|p| (rho * p).trace().re)
        .collect())
}

/// `ρ = (I + Σ ⟨P⟩ P) / N`.
pub fn state_from_expectations(dim: usize, expectations: &[f64]) -> Result<CMatrix> {
    let k = pauli::qubit_count(dim).ok_or(Error::NotQubitDimension(dim))?;
    let strings = pauli::strings(k);
    if expectations.len() != strings.len() - 1 {
        return Err(Error::DimensionMismatch {
            expected: strings.len() - 1,
            found: expectations.len(),
        });
    }
    let mut rho = CMatrix::identity(dim, dim);
    for (p, &e) in strings.iter().skip(1).zip(expectations) {
        rho += p.map(|z| z * e);
    }
    Ok(rho.unscale(dim as f64))
}

/// Simulated Pauli state tomography.
///
/// Exact mode returns the Hermitian part of the input (what exact Pauli
/// inversion gives), for any dimension. With a finite count each
/// expectation is estimated from that many ±1 outcomes.
pub fn state_tomography(rho: &CMatrix, shots: Shots, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    match shots {
        Shots::Exact => Ok(numerics::hermitian_part(rho)),
        Shots::Count(n) => {
            let exact = pauli_expectations(rho)?;
            let estimates = exact
                .iter()
                .map(|&e| {
                    let p = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
                    let ups = Binomial::new(n, p)
                        .expect("probability clamped to [0, 1]")
                        .sample(rng);
                    2.0 * ups as f64 / n as f64 - 1.0
                })
                .collect::<Vec<_>>();
            state_from_expectations(rho.nrows(), &estimates)
        }
    }
}

/// Measured outputs for every state-basis element `ρ_j = |n⟩⟨m|`.
///
/// `records[j]` is `E(ρ_j)` assembled from the tomographic estimates of the
/// physical preparations; off-diagonal elements are not density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    dim: usize,
    shots: Shots,
    seed: u64,
    records: Vec<CMatrix>,
}

impl TomographyDataset {
    pub fn new(dim: usize, shots: Shots, seed: u64, records: Vec<CMatrix>) -> Result<Self> {
        if records.len() != dim * dim {
            return Err(Error::IncompleteDataset(format!(
                "expected {} records, found {}",
                dim * dim,
                records.len()
            )));
        }
        for r in &records {
            numerics::check_finite(r)?;
            if r.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.nrows(),
                });
            }
        }
        Ok(Self {
            dim,
            shots,
            seed,
            records,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn records(&self) -> &[CMatrix] {
        &self.records
    }

    pub fn record(&self, j: usize) -> &CMatrix {
        &self.records[j]
    }
}

/// Prepares each physical input, applies `op`, runs state tomography on the
/// output and assembles `E(|n⟩⟨m|)`.
pub fn simulate_dataset(op: &KrausSet, shots: Shots, seed: u64) -> Result<TomographyDataset> {
    if !op.is_trace_preserving() {
        return Err(Error::NotTracePreserving {
            defect: op.completeness_defect(),
        });
    }
    let dim = op.dim();
    let recipe = PreparationRecipe::new(dim);
    let outputs = recipe
        .preparations()
        .iter()
        .enumerate()
        .map(|(j, psi)| {
            let out = op.apply_unchecked(&(psi * psi.adjoint()));
            state_tomography(&out, shots, &mut record_rng(seed, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = recipe.assemble(&outputs)?;
    TomographyDataset::new(dim, shots, seed, records)
}

/// Dataset produced by an exact superoperator-level description, used when
/// only the linear action is known (no Kraus form).
pub fn exact_dataset_from_action(
    dim: usize,
    action: impl Fn(&CMatrix) -> CMatrix,
) -> Result<TomographyDataset> {
    let records = (0..dim * dim)
        .map(|j| {
            let mut e = CMatrix::zeros(dim, dim);
            e[(j / dim, j % dim)] = c64(1.0, 0.0);
            action(&e)
        })
        .collect();
    TomographyDataset::new(dim, Shots::Exact, 0, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{models, DensityMatrix};
    use crate::tomography::projector_state_basis;

    #[test]
    fn shots_parse_and_display() {
        assert_eq!("exact".parse::<Shots>().unwrap(), Shots::Exact);
        assert_eq!("1e4".parse::<Shots>().unwrap(), Shots::Count(10_000));
        assert_eq!("250".parse::<Shots>().unwrap(), Shots::Count(250));
        assert!("0".parse::<Shots>().is_err());
        assert!("2.5".parse::<Shots>().is_err());
        assert_eq!(Shots::Count(7).to_string(), "7");
    }

    #[test]
    fn identity_exact_records_are_basis_elements() {
        for dim in [2, 3, 4] {
            let data = simulate_dataset(&KrausSet::identity(dim), Shots::Exact, 0).unwrap();
            let basis = projector_state_basis(dim);
            for j in 0..dim * dim {
                assert!((data.record(j) - basis.get(j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_inversion_round_trip() {
        let rho = DensityMatrix::maximally_mixed(4);
        let e = pauli_expectations(rho.matrix()).unwrap();
        assert_eq!(e.len(), 15);
        let back = state_from_expectations(4, &e).unwrap();
        assert!((back - rho.matrix()).norm() < 1e-15);
        assert!(matches!(
            pauli_expectations(&CMatrix::identity(3, 3)),
            Err(Error::NotQubitDimension(3))
        ));
    }

    #[test]
    fn shot_noise_concentrates() {
        let op = models::depolarizing(0.5).unwrap();
        let shots = 100_000u64;
        let bound = 5.0 / (shots as f64).sqrt();
        let recipe = PreparationRecipe::new(2);
        for (j, psi) in recipe.preparations().iter().enumerate() {
            let out = op.apply_unchecked(&(psi * psi.adjoint()));
            let est = state_tomography(&out, Shots::Count(shots), &mut record_rng(7, j)).unwrap();
            let exact = pauli_expectations(&out).unwrap();
            let noisy = pauli_expectations(&est).unwrap();
            for (a, b) in exact.iter().zip(&noisy) {
                assert!((a - b).abs() < bound);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let op = models::amplitude_damping(0.3).unwrap();
        let a = simulate_dataset(&op, Shots::Count(500), 11).unwrap();
        let b = simulate_dataset(&op, Shots::Count(500), 11).unwrap();
        let c = simulate_dataset(&op, Shots::Count(500), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn selective_input_rejected() {
        let half = KrausSet::selective(vec![CMatrix::identity(2, 2).scale(0.5)]).unwrap();
        assert!(matches!(
            simulate_dataset(&half, Shots::Exact, 0),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn sub_seeds_differ_by_index() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
    }
}
