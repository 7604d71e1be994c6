//! Channel quality figures: entanglement fidelity, minimum fidelity,
//! entropy exchange, single-letter capacity and the Lindblad logarithm.

mod optimize;

use crate::channel::{ChiMatrix, DensityMatrix, KrausSet, OperatorBasis, Superoperator};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, CVector};

use optimize::{MixedParam, Optimum};

/// Coherent information at or below this is reported as zero capacity.
const CAPACITY_FLOOR: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-9;
/// Times at which `exp(tL)` is checked for complete positivity.
pub const DIVISIBILITY_TIMES: [f64; 3] = [0.25, 0.5, 0.75];
const DIVISIBILITY_TOL: f64 = 1e-6;

fn check_target(target: &CMatrix, dim: usize) -> Result<()> {
    if target.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: target.nrows(),
        });
    }
    let defect = numerics::unitarity_defect(target);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

fn check_dim(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `F_e = Σ_i |tr(U† A_i ρ)|²`.
pub fn entanglement_fidelity_kraus(
    rho: &DensityMatrix,
    target: &CMatrix,
    op: &KrausSet,
) -> Result<f64> {
    check_dim(rho.dim(), op.dim())?;
    check_target(target, op.dim())?;
    Ok(clamp_unit(fidelity_kraus_unchecked(
        rho.matrix(),
        target,
        op,
    )))
}

fn fidelity_kraus_unchecked(rho: &CMatrix, target: &CMatrix, op: &KrausSet) -> f64 {
    let ud = target.adjoint();
    op.operators()
        .iter()
        .map(|a| (&ud * a * rho).trace().norm_sqr())
        .sum()
}

/// `F_e = Σ_mn χ_mn tr(U† Ã_m ρ) tr(ρ Ã_n† U)`.
pub fn entanglement_fidelity_chi(
    rho: &DensityMatrix,
    target: &CMatrix,
    chi: &ChiMatrix,
) -> Result<f64> {
    check_dim(rho.dim(), chi.dim())?;
    check_target(target, chi.dim())?;
    let ud = target.adjoint();
    let t = CVector::from_iterator(
        chi.basis().len(),
        chi.basis()
            .operators()
            .iter()
            .map(|a| (&ud * a * rho.matrix()).trace()),
    );
    let value = (t.adjoint() * chi.matrix().transpose() * &t)[(0, 0)].re;
    Ok(clamp_unit(value))
}

/// Optimizer outcome: the extremal value and the state achieving it.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub value: f64,
    pub state: DensityMatrix,
    /// Pure-state vector when the search ran over pure states.
    pub pure_state: Option<CVector>,
    pub method: String,
    pub evaluations: usize,
}

/// Minimum over pure states of `⟨ψ|U† E(|ψ⟩⟨ψ|) U|ψ⟩`. The value is an upper
/// bound on the true minimum.
pub fn min_fidelity(target: &CMatrix, op: &KrausSet) -> Result<FidelityReport> {
    let dim = op.dim();
    check_target(target, dim)?;
    let mut objective = |p: &[f64]| {
        let psi = optimize::pure_state(dim, p);
        let phi = target * &psi;
        // ⟨ψ|U† A_i|ψ⟩ ⟨ψ|A_i† U|ψ⟩
        op.operators()
            .iter()
            .map(|a| (phi.adjoint() * a * &psi)[(0, 0)].norm_sqr())
            .sum::<f64>()
    };
    let grid = optimize::pure_state_grid(dim);
    let Optimum {
        point,
        value,
        evaluations,
    } = optimize::search(&mut objective, &grid, 0.1);
    let psi = optimize::pure_state(dim, &point);
    let state = DensityMatrix::pure(&psi)?;
    Ok(FidelityReport {
        value: clamp_unit(value),
        state,
        pure_state: Some(psi),
        method: method_label(dim, grid.len(), "pure-state"),
        evaluations,
    })
}

/// Minimum of the entanglement fidelity over all density matrices.
pub fn min_entanglement_fidelity(target: &CMatrix, op: &KrausSet) -> Result<FidelityReport> {
    let dim = op.dim();
    check_target(target, dim)?;
    let param = MixedParam::for_dim(dim);
    let mut objective = |p: &[f64]| fidelity_kraus_unchecked(param.state(p).matrix(), target, op);
    let grid = param.grid();
    let opt = optimize::search(&mut objective, &grid, param.step());
    Ok(FidelityReport {
        value: clamp_unit(opt.value),
        state: param.state(&opt.point),
        pure_state: None,
        method: method_label(dim, grid.len(), "density-matrix"),
        evaluations: opt.evaluations,
    })
}

fn method_label(dim: usize, grid: usize, space: &str) -> String {
    let kind = if dim == 2 {
        "sphere grid"
    } else {
        "Halton grid"
    };
    format!(
        "{space} {kind} ({grid} points) + Nelder-Mead ({} restarts x {} iterations)",
        optimize::RESTARTS,
        optimize::REFINE_ITERATIONS
    )
}

/// `W_ij = tr(A_i ρ A_j†)`.
pub fn exchange_matrix(rho: &DensityMatrix, op: &KrausSet) -> Result<CMatrix> {
    check_dim(rho.dim(), op.dim())?;
    Ok(exchange_matrix_unchecked(rho.matrix(), op))
}

fn exchange_matrix_unchecked(rho: &CMatrix, op: &KrausSet) -> CMatrix {
    let ops = op.operators();
    let left: Vec<CMatrix> = ops.iter().map(|a| a * rho).collect();
    CMatrix::from_fn(ops.len(), ops.len(), |i, j| {
        // tr(X Y†) = Σ X_kl conj(Y_kl)
        left[i].zip_map(&ops[j], |x, y| x * y.conj()).sum()
    })
}

/// Von Neumann entropy (bits) of the exchange matrix `W`.
pub fn entropy_exchange(rho: &DensityMatrix, op: &KrausSet) -> Result<f64> {
    check_dim(rho.dim(), op.dim())?;
    entropy_exchange_unchecked(rho.matrix(), op)
}

fn entropy_exchange_unchecked(rho: &CMatrix, op: &KrausSet) -> Result<f64> {
    let w = exchange_matrix_unchecked(rho, op);
    Ok(numerics::spectrum_entropy(
        &numerics::herm_eig(&w)?.eigenvalues,
    ))
}

fn output_entropy(rho: &CMatrix, op: &KrausSet) -> Result<f64> {
    let out = numerics::hermitian_part(&op.apply_unchecked(rho));
    Ok(numerics::spectrum_entropy(
        &numerics::herm_eig(&out)?.eigenvalues,
    ))
}

/// `S(E(ρ)) − S_e(ρ, E)` in bits.
pub fn coherent_information(rho: &DensityMatrix, op: &KrausSet) -> Result<f64> {
    check_dim(rho.dim(), op.dim())?;
    Ok(output_entropy(rho.matrix(), op)? - entropy_exchange_unchecked(rho.matrix(), op)?)
}

#[derive(Debug, Clone)]
pub struct CapacityReport {
    /// `raw`, or zero when `raw` is not positive.
    pub capacity: f64,
    /// The optimum of the coherent information before flooring.
    pub raw: f64,
    pub state: DensityMatrix,
    pub output_entropy: f64,
    pub entropy_exchange: f64,
    pub note: Option<String>,
    pub method: String,
    pub evaluations: usize,
}

/// Maximizes `S(E(ρ)) − S_e(ρ, E)` over density matrices. The value is a
/// lower bound on the true maximum.
pub fn channel_capacity(op: &KrausSet) -> Result<CapacityReport> {
    if !op.is_trace_preserving() {
        return Err(Error::NotTracePreserving {
            defect: op.completeness_defect(),
        });
    }
    let dim = op.dim();
    let param = MixedParam::for_dim(dim);
    let mut objective = |p: &[f64]| {
        let rho = param.state(p);
        match (
            output_entropy(rho.matrix(), op),
            entropy_exchange_unchecked(rho.matrix(), op),
        ) {
            (Ok(s), Ok(se)) => se - s,
            _ => f64::INFINITY,
        }
    };
    let grid = param.grid();
    let opt = optimize::search(&mut objective, &grid, param.step());
    let state = param.state(&opt.point);
    let output = output_entropy(state.matrix(), op)?;
    let exchange = entropy_exchange_unchecked(state.matrix(), op)?;
    let raw = output - exchange;
    let non_positive = raw <= CAPACITY_FLOOR;
    let note = non_positive.then(|| "coherent information non-positive".to_string());
    Ok(CapacityReport {
        capacity: if non_positive { 0.0 } else { raw },
        raw,
        state,
        output_entropy: output,
        entropy_exchange: exchange,
        note,
        method: method_label(dim, grid.len(), "density-matrix"),
        evaluations: opt.evaluations,
    })
}

/// Complete positivity of `exp(tL)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisibilityCheck {
    pub t: f64,
    pub min_chi_eigenvalue: f64,
    pub valid: bool,
}

/// Principal logarithm of a channel and how well it behaves as a generator.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    pub generator: Superoperator,
    /// `‖exp(L) − E‖_F`.
    pub round_trip_residual: f64,
    pub checks: Vec<DivisibilityCheck>,
    /// Whether every `exp(tL)` checked is completely positive.
    pub valid: bool,
}

/// `L = log E` on the superoperator; refuses eigenvalues on the branch cut.
pub fn lindblad_log(channel: &Superoperator) -> Result<LindbladGenerator> {
    let l = numerics::matrix_log(channel.matrix())?;
    let dim = channel.dim();
    let round_trip_residual = (numerics::matrix_exp(&l)? - channel.matrix()).norm();
    let basis = OperatorBasis::default_for_dim(dim);
    let checks = DIVISIBILITY_TIMES
        .iter()
        .map(|&t| {
            let step =
                Superoperator::from_matrix_unchecked(dim, numerics::matrix_exp(&l.scale(t))?);
            let min = step.to_chi(&basis)?.min_eigenvalue()?;
            Ok(DivisibilityCheck {
                t,
                min_chi_eigenvalue: min,
                valid: min >= -DIVISIBILITY_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let valid = checks.iter().all(|c| c.valid);
    Ok(LindbladGenerator {
        generator: Superoperator::from_matrix_unchecked(dim, l),
        round_trip_residual,
        checks,
        valid,
    })
}

pub fn lindblad_log_kraus(op: &KrausSet) -> Result<LindbladGenerator> {
    lindblad_log(&op.to_superoperator())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{kraus_to_chi, models, standard_basis};
    use crate::numerics::NumericsError;
    use crate::pauli;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let op = models::random_channel(dim, dim, rng);
        let (rho, _) = op.apply(&DensityMatrix::basis_state(dim, 0)).unwrap();
        rho
    }

    fn id2() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    #[test]
    fn entanglement_fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = models::random_unitary(2, &mut rng);
        let rho = random_state(2, &mut rng);
        let f =
            entanglement_fidelity_kraus(&rho, &u, &KrausSet::unitary(u.clone()).unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);

        let half = DensityMatrix::maximally_mixed(2);
        let p = 0.36;
        let dep = models::depolarizing(p).unwrap();
        let f = entanglement_fidelity_kraus(&half, &id2(), &dep).unwrap();
        assert!((f - (1.0 - 0.75 * p)).abs() < 1e-12);
        let chi = kraus_to_chi(&dep, &standard_basis(1)).unwrap();
        let f = entanglement_fidelity_chi(&half, &id2(), &chi).unwrap();
        assert!((f - (1.0 - 0.75 * p)).abs() < 1e-12);

        let x = KrausSet::unitary(pauli::sigma_x()).unwrap();
        assert!(entanglement_fidelity_kraus(&half, &id2(), &x).unwrap() < 1e-15);

        let not_unitary = id2().scale(0.5);
        assert!(matches!(
            entanglement_fidelity_kraus(&half, &not_unitary, &dep),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn min_fidelity_examples() {
        let q = 0.3;
        let report = min_fidelity(&id2(), &models::phase_damping(q).unwrap()).unwrap();
        assert!((report.value - (1.0 - q)).abs() < 1e-4);
        // the minimizer sits on the equator
        let z = (report.state.matrix() * pauli::sigma_z()).trace().re;
        assert!(z.abs() < 1e-2);

        let p = 0.4;
        let report = min_fidelity(&id2(), &models::depolarizing(p).unwrap()).unwrap();
        assert!((report.value - (1.0 - p / 2.0)).abs() < 1e-4);

        let u = models::z_rotation(0.4);
        let report = min_fidelity(&u, &KrausSet::unitary(u.clone()).unwrap()).unwrap();
        assert!((report.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_fidelity_bounds_every_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = models::random_channel(2, 2, &mut rng);
        let report = min_fidelity(&id2(), &op).unwrap();
        for _ in 0..50 {
            let psi = models::random_unitary(2, &mut rng).column(0).into_owned();
            let rho = DensityMatrix::pure(&psi).unwrap();
            let out = op.apply_linear(rho.matrix()).unwrap();
            let f = (psi.adjoint() * out * &psi)[(0, 0)].re;
            assert!(report.value <= f + 1e-12);
        }
    }

    #[test]
    fn entropy_exchange_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(2, &mut rng);
        let u = KrausSet::unitary(models::random_unitary(2, &mut rng)).unwrap();
        assert!(entropy_exchange(&rho, &u).unwrap().abs() < 1e-12);

        let full = models::depolarizing(1.0).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        let w = exchange_matrix(&half, &full).unwrap();
        assert!((w - CMatrix::identity(4, 4).unscale(4.0)).norm() < 1e-14);
        assert!((entropy_exchange(&half, &full).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_examples() {
        let id = channel_capacity(&KrausSet::identity(2)).unwrap();
        assert!((id.capacity - 1.0).abs() < 1e-3);
        assert!((id.state.matrix() - CMatrix::identity(2, 2).unscale(2.0)).norm() < 1e-2);
        assert!((id.capacity - (id.output_entropy - id.entropy_exchange)).abs() < 1e-9);

        let full = channel_capacity(&models::depolarizing(1.0).unwrap()).unwrap();
        assert_eq!(full.capacity, 0.0);
        assert!(full.raw <= 1e-12);
        assert_eq!(
            full.note.as_deref(),
            Some("coherent information non-positive")
        );
    }

    #[test]
    fn two_qubit_unitary_capacity() {
        let u = KrausSet::unitary(models::cnot()).unwrap();
        let report = channel_capacity(&u).unwrap();
        assert!((report.capacity - 2.0).abs() < 1e-3);
        assert!(report.capacity <= 2.0 + 1e-6);
    }

    #[test]
    fn capacity_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let op = models::amplitude_damping(0.2).unwrap();
        let u = KrausSet::unitary(models::random_unitary(2, &mut rng)).unwrap();
        let a = channel_capacity(&op).unwrap().capacity;
        let b = channel_capacity(&op.then(&u).unwrap()).unwrap().capacity;
        assert!((a - b).abs() < 2e-3);
    }

    #[test]
    fn lindblad_examples() {
        let gen = lindblad_log_kraus(&KrausSet::identity(2)).unwrap();
        assert!(gen.generator.matrix().norm() < 1e-12);
        assert!(gen.valid);

        // dephasing generator ρ ↦ ½(σz ρ σz − ρ)
        let z = pauli::sigma_z();
        let l = (z.conjugate().kronecker(&z) - CMatrix::identity(4, 4)).scale(0.5);
        let channel = Superoperator::new(2, numerics::matrix_exp(&l).unwrap()).unwrap();
        let q = (1.0 - (-1.0f64).exp()) / 2.0;
        let damping = models::phase_damping(q).unwrap().to_superoperator();
        assert!(channel.distance(&damping).unwrap() < 1e-12);
        let gen = lindblad_log(&channel).unwrap();
        assert!((gen.generator.matrix() - &l).norm() < 1e-8);
        assert!(gen.round_trip_residual < 1e-8);
        assert!(gen.valid);

        let flip = KrausSet::unitary(pauli::sigma_x()).unwrap();
        assert!(matches!(
            lindblad_log_kraus(&flip),
            Err(Error::Numerics(NumericsError::BranchCutEigenvalue { .. }))
        ));
    }

    #[test]
    fn amplitude_damping_generator_is_valid() {
        let gen = lindblad_log_kraus(&models::amplitude_damping(0.5).unwrap()).unwrap();
        assert!(gen.round_trip_residual < 1e-8);
        assert!(gen.valid, "{:?}", gen.checks);
    }

    #[test]
    fn min_entanglement_fidelity_of_depolarizing() {
        // F_e(ρ) = (1−3p/4) tr(ρ)² + p/4 Σ_k tr(σ_k ρ)², minimized at I/2
        let p = 0.2;
        let report = min_entanglement_fidelity(&id2(), &models::depolarizing(p).unwrap()).unwrap();
        assert!((report.value - (1.0 - 0.75 * p)).abs() < 1e-6);
    }

    #[test]
    fn pure_input_exchange_equals_output_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let op = models::random_channel(2, 3, &mut rng);
            let psi = models::random_unitary(2, &mut rng).column(0).into_owned();
            let rho = DensityMatrix::pure(&psi).unwrap();
            let se = entropy_exchange(&rho, &op).unwrap();
            let (out, _) = op.apply(&rho).unwrap();
            assert!((se - out.entropy()).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kraus_and_chi_forms_agree(seed in any::<u64>(), rank in 1usize..=4, qubits in 1usize..=2) {
            let dim = 1 << qubits;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = models::random_channel(dim, rank, &mut rng);
            let u = models::random_unitary(dim, &mut rng);
            let rho = random_state(dim, &mut rng);
            let chi = kraus_to_chi(&op, &standard_basis(qubits)).unwrap();
            let a = entanglement_fidelity_kraus(&rho, &u, &op).unwrap();
            let b = entanglement_fidelity_chi(&rho, &u, &chi).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn metrics_ignore_kraus_remixing(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = models::random_channel(2, 3, &mut rng);
            let v = models::random_unitary(3, &mut rng);
            let remixed = op.remix(&v).unwrap();
            let rho = random_state(2, &mut rng);
            let u = models::random_unitary(2, &mut rng);
            let fa = entanglement_fidelity_kraus(&rho, &u, &op).unwrap();
            let fb = entanglement_fidelity_kraus(&rho, &u, &remixed).unwrap();
            prop_assert!((fa - fb).abs() < 1e-9);
            let sa = entropy_exchange(&rho, &op).unwrap();
            let sb = entropy_exchange(&rho, &remixed).unwrap();
            prop_assert!((sa - sb).abs() < 1e-9);
        }
    }

    #[test]
    fn capacity_ignores_kraus_remixing() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let op = models::random_channel(2, 2, &mut rng);
        let remixed = op.remix(&models::random_unitary(2, &mut rng)).unwrap();
        let a = channel_capacity(&op).unwrap();
        let b = channel_capacity(&remixed).unwrap();
        assert!((a.raw - b.raw).abs() < 1e-9);
    }
}
