//! Selective operations: one non-trace-preserving operation per outcome.
//!
//! Outcome `i` occurs with probability `tr E_i(ρ)` and leaves
//! `E_i(ρ)/tr E_i(ρ)`. The renormalization is not linear, so the branch
//! outputs are re-weighted by their estimated probabilities before the
//! usual linear reconstruction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::{tolerance, ChiMatrix, DensityMatrix, KrausSet, OperatorBasis, Validation};
use crate::error::{Error, Result};
use crate::numerics::{self, c64, CMatrix};
use crate::tomography::{
    self, compute_beta, compute_lambda, record_rng, ChiSolver, PreparationRecipe, Shots,
    StateBasis, TomographyDataset,
};

/// Probability below which a branch is treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Labelled selective operations whose sum is trace preserving.
#[derive(Debug, Clone)]
pub struct Instrument {
    dim: usize,
    branches: Vec<(String, KrausSet)>,
}

impl Instrument {
    pub fn new(branches: Vec<(String, KrausSet)>) -> Result<Self> {
        let dim = branches
            .first()
            .ok_or_else(|| Error::InvalidInstrument("no branches".into()))?
            .1
            .dim();
        let mut total = CMatrix::zeros(dim, dim);
        for (i, (label, op)) in branches.iter().enumerate() {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            if branches[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidInstrument(format!(
                    "duplicate label {label:?}"
                )));
            }
            total += op.completeness();
        }
        let defect = (total - CMatrix::identity(dim, dim)).norm();
        if defect > tolerance::KRAUS_COMPLETENESS {
            return Err(Error::InvalidInstrument(format!(
                "branches are not jointly trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(Self { dim, branches })
    }

    /// Projective measurement in the computational basis, labelled `"0"`, `"1"`, ….
    pub fn computational_basis(dim: usize) -> Self {
        let branches = (0..dim)
            .map(|k| {
                let mut p = CMatrix::zeros(dim, dim);
                p[(k, k)] = c64(1.0, 0.0);
                (
                    k.to_string(),
                    KrausSet::selective(vec![p]).expect("projector"),
                )
            })
            .collect();
        Self::new(branches).expect("projectors sum to the identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branches(&self) -> &[(String, KrausSet)] {
        &self.branches
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.branches.iter().map(|(l, _)| l.as_str())
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.branches
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownBranch(label.to_string()))
    }

    pub fn branch(&self, label: &str) -> Result<&KrausSet> {
        Ok(&self.branches[self.index(label)?].1)
    }

    /// Exact outcome probabilities for `rho`, in branch order.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.branches
            .iter()
            .map(|(_, op)| op.apply_unchecked(rho).trace().re.clamp(0.0, 1.0))
            .collect()
    }
}

/// Outcome counts over all branches from `trials` independent runs.
fn sample_counts(probabilities: &[f64], trials: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut remaining = trials;
    let mut mass: f64 = probabilities.iter().sum();
    let mut counts = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        let k = if i + 1 == probabilities.len() || remaining == 0 {
            remaining
        } else {
            let q = if mass > 0.0 {
                (p / mass).clamp(0.0, 1.0)
            } else {
                0.0
            };
            Binomial::new(remaining, q)
                .expect("clamped probability")
                .sample(rng)
        };
        counts.push(k);
        remaining -= k;
        mass -= p;
    }
    counts
}

fn estimate(probabilities: &[f64], branch: usize, trials: Shots, rng: &mut ChaCha8Rng) -> f64 {
    match trials {
        Shots::Exact => probabilities[branch],
        Shots::Count(n) => sample_counts(probabilities, n, rng)[branch] as f64 / n as f64,
    }
}

/// Outcome probability (exact or a frequency over `trials`) and the exact
/// post-measurement state.
pub fn simulate_branch(
    model: &Instrument,
    label: &str,
    input: &DensityMatrix,
    trials: Shots,
    seed: u64,
) -> Result<(f64, DensityMatrix)> {
    let b = model.index(label)?;
    if input.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: input.dim(),
        });
    }
    let probabilities = model.probabilities(input.matrix());
    if probabilities[b] < ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch {
            probability: probabilities[b],
        });
    }
    let (state, _) = model.branches[b].1.apply(input)?;
    let p = estimate(
        &probabilities,
        b,
        trials,
        &mut ChaCha8Rng::seed_from_u64(seed),
    );
    Ok((p, state))
}

/// Estimated probability and normalized output for one preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub p: f64,
    /// `None` when the outcome never occurred.
    pub state: Option<CMatrix>,
}

/// Per-preparation outcome statistics of one branch, indexed like the
/// tomography preparations.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDataset {
    dim: usize,
    label: String,
    trials: Shots,
    seed: u64,
    records: Vec<BranchRecord>,
}

impl BranchDataset {
    pub fn new(
        dim: usize,
        label: String,
        trials: Shots,
        seed: u64,
        records: Vec<BranchRecord>,
    ) -> Result<Self> {
        if records.len() != dim * dim {
            return Err(Error::IncompleteDataset(format!(
                "expected {} records, found {}",
                dim * dim,
                records.len()
            )));
        }
        for r in &records {
            if !(0.0..=1.0).contains(&r.p) {
                return Err(Error::Malformed(format!(
                    "probability {} outside [0, 1]",
                    r.p
                )));
            }
            if let Some(s) = &r.state {
                numerics::check_finite(s)?;
                if s.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: s.nrows(),
                    });
                }
            } else if r.p > 0.0 {
                return Err(Error::IncompleteDataset(format!(
                    "record with probability {} has no state",
                    r.p
                )));
            }
        }
        Ok(Self {
            dim,
            label,
            trials,
            seed,
            records,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn trials(&self) -> Shots {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn records(&self) -> &[BranchRecord] {
        &self.records
    }
}

/// Runs every tomography preparation through the instrument and keeps the
/// statistics of `label`. Outcome counts are drawn jointly over all
/// branches, so datasets for different labels with the same seed are
/// mutually consistent. `tomography` adds state-tomography noise to the
/// post-measurement states.
pub fn simulate_branch_dataset(
    model: &Instrument,
    label: &str,
    trials: Shots,
    tomography: Shots,
    seed: u64,
) -> Result<BranchDataset> {
    let b = model.index(label)?;
    let recipe = PreparationRecipe::new(model.dim);
    let records = recipe
        .preparations()
        .iter()
        .enumerate()
        .map(|(j, psi)| {
            let rho = psi * psi.adjoint();
            let probabilities = model.probabilities(&rho);
            let mut rng = record_rng(seed, j);
            let p = estimate(&probabilities, b, trials, &mut rng);
            if p <= 0.0 || probabilities[b] < ZERO_PROBABILITY {
                return Ok(BranchRecord {
                    p: 0.0,
                    state: None,
                });
            }
            let out = model.branches[b]
                .1
                .apply_unchecked(&rho)
                .unscale(probabilities[b]);
            let state = tomography::state_tomography(&out, tomography, &mut rng)?;
            Ok(BranchRecord {
                p,
                state: Some(state),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BranchDataset::new(model.dim, label.to_string(), trials, seed, records)
}

/// `E_i(ρ_j) = p̂_j ρ′_j` per preparation, then the recipe's linear
/// combination for the projector inputs.
pub fn denormalize(data: &BranchDataset) -> Result<TomographyDataset> {
    let n = data.dim;
    let outputs: Vec<CMatrix> = data
        .records
        .iter()
        .map(|r| match &r.state {
            Some(s) => s.scale(r.p),
            None => CMatrix::zeros(n, n),
        })
        .collect();
    let records = PreparationRecipe::new(n).assemble(&outputs)?;
    TomographyDataset::new(n, data.trials, data.seed, records)
}

/// χ of one branch (generally not trace preserving).
pub fn reconstruct_branch(data: &BranchDataset, basis: &OperatorBasis) -> Result<ChiMatrix> {
    let states = StateBasis::projectors(data.dim);
    let solver = ChiSolver::new(basis.clone(), compute_beta(basis, &states)?)?;
    reconstruct_branch_with(&solver, data)
}

pub fn reconstruct_branch_with(solver: &ChiSolver, data: &BranchDataset) -> Result<ChiMatrix> {
    let linear = denormalize(data)?;
    let lambda = compute_lambda(&linear, &StateBasis::projectors(data.dim))?;
    Ok(solver.solve(&lambda, Validation::Lenient)?.chi)
}
