use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use qpt_core::bloch::{affine_from_channel, decoherence_summary, polar_factors};
use qpt_core::channel::{ChiMatrix, DensityMatrix, Superoperator, Validation};
use qpt_core::format::{
    self, round_significant, BranchDatasetFile, Channel, ChannelBody, ChannelFile, DatasetFile,
    InstrumentFile, RunManifest, StateFile,
};
use qpt_core::measurement::{reconstruct_branch_with, simulate_branch_dataset, BranchDataset};
use qpt_core::metrics::{
    channel_capacity, entanglement_fidelity_chi, entanglement_fidelity_kraus, lindblad_log,
    min_fidelity,
};
use qpt_core::numerics::{CMatrix, CVector};
use qpt_core::tomography::{
    compute_lambda, reconstruct_chi_closed_form_1q, reconstruct_chi_closed_form_2q,
    simulate_dataset, ChiSolver, LambdaMatrix, StateBasis,
};
use qpt_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::*;
use crate::exit::{self, Coded};
use crate::report::*;

pub fn run(cli: &Cli) -> Result<()> {
    let validation = if cli.verify {
        Validation::Strict
    } else {
        Validation::Lenient
    };
    match &cli.command {
        Command::Generate(a) => generate(a, validation),
        Command::Reconstruct(a) => reconstruct(a, validation),
        Command::Kraus(a) => kraus(a, validation),
        Command::Bloch(a) => bloch(a, validation),
        Command::Metrics(a) => metrics(a, validation),
        Command::Measure(a) => measure(a, validation),
        Command::Verify(a) => verify(&a.file),
    }
}

fn manifest(command: &str, inputs: &[&Path]) -> RunManifest {
    let mut m = RunManifest::new(command, env!("CARGO_PKG_VERSION"));
    m.inputs = inputs.iter().map(|p| p.display().to_string()).collect();
    m
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    format::from_json(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    emit(path, &format::to_json(value)?)
}

fn read_channel(path: &Path, validation: Validation) -> Result<Channel> {
    let file: ChannelFile = read(path)?;
    file.decode(validation)
        .with_context(|| format!("invalid channel in {}", path.display()))
}

fn generate(a: &GenerateArgs, validation: Validation) -> Result<()> {
    let channel = read_channel(&a.channel, validation)?;
    if let Some(k) = a.qubits {
        let expected = 1usize
            .checked_shl(k)
            .ok_or_else(|| Coded::new(exit::DIMENSIONS, format!("{k} qubits is too many")))?;
        if channel.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: channel.dim(),
            })
            .context(format!("channel does not act on {k} qubit(s)"));
        }
    }
    let op = channel.to_kraus()?;
    let data = simulate_dataset(&op, a.shots, a.seed.seed)?;
    let mut m = manifest("generate", &[&a.channel]);
    m.seed = Some(a.seed.seed);
    m.shots = Some(a.shots);
    emit_json(
        Some(&a.out),
        &DatasetFile::from_dataset(&data).with_manifest(m),
    )
}

fn chi_vector(chi: &ChiMatrix) -> CVector {
    let d = chi.matrix().nrows();
    CVector::from_iterator(d * d, chi.matrix().transpose().iter().copied())
}

fn residual(solver: &ChiSolver, lambda: &LambdaMatrix, chi: &ChiMatrix) -> f64 {
    (solver.beta().matrix() * chi_vector(chi) - lambda.as_vector()).norm()
}

/// Report values: 12 significant digits, with rounding noise below 1e-14
/// shown as 0.
fn report_number(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        round_significant(x)
    }
}

fn reconstruct(a: &ReconstructArgs, validation: Validation) -> Result<()> {
    let data = read::<DatasetFile>(&a.dataset)?
        .decode(validation)
        .with_context(|| format!("invalid dataset in {}", a.dataset.display()))?;
    let n = data.dim();
    let solver = ChiSolver::for_dim(n)?;
    let lambda = compute_lambda(&data, &StateBasis::projectors(n))?;
    let closed = |result: qpt_core::Result<ChiMatrix>, name: &str| -> Result<ChiMatrix> {
        result.map_err(|e| match e {
            Error::WrongDimension { expected, found } => Coded::new(
                exit::METHOD,
                format!("method {name} needs dimension {expected}, dataset has {found}"),
            )
            .into(),
            other => other.into(),
        })
    };
    let chi = match a.method {
        Method::General => solver.solve(&lambda, Validation::Lenient)?.chi,
        Method::Closed1q => closed(reconstruct_chi_closed_form_1q(&data), "closed1q")?,
        Method::Closed2q => closed(reconstruct_chi_closed_form_2q(&data), "closed2q")?,
    };
    let chi = if a.project_physical {
        chi.project_physical()?
    } else {
        chi
    };
    let mut m = manifest("reconstruct", &[&a.dataset]);
    m.seed = Some(data.seed());
    m.shots = Some(data.shots());
    emit_json(Some(&a.out), &ChannelFile::from_chi(&chi)?.with_manifest(m))?;

    let method = match a.method {
        Method::General => "general",
        Method::Closed1q => "closed1q",
        Method::Closed2q => "closed2q",
    };
    println!("method: {method}");
    println!(
        "residual: {}",
        report_number(residual(&solver, &lambda, &chi))
    );
    println!("min_eigenvalue: {}", report_number(chi.min_eigenvalue()?));
    println!(
        "trace_defect: {}",
        report_number(chi.trace_preservation_defect())
    );
    println!("trace_preserving: {}", chi.is_trace_preserving());
    Ok(())
}

fn kraus(a: &KrausArgs, validation: Validation) -> Result<()> {
    let op = read_channel(&a.chi, validation)?.to_kraus()?;
    emit_json(
        Some(&a.out),
        &ChannelFile::from_kraus(&op).with_manifest(manifest("kraus", &[&a.chi])),
    )
}

fn bloch(a: &BlochArgs, validation: Validation) -> Result<()> {
    let op = read_channel(&a.channel, validation)?.to_kraus()?;
    let map = affine_from_channel(&op)?;
    let polar = polar_factors(&map)?;
    let summary = decoherence_summary(&map)?;
    let csv = bloch_csv(&manifest("bloch", &[&a.channel]), &map, &polar, &summary)?;
    emit(a.csv.as_deref(), &csv)
}

fn metrics(a: &MetricsArgs, validation: Validation) -> Result<()> {
    let channel = read_channel(&a.channel, validation)?;
    let n = channel.dim();
    let mut inputs = vec![a.channel.as_path()];
    inputs.extend(a.target.as_deref());
    let target = match &a.target {
        Some(p) => {
            let u = read::<ChannelFile>(p)?.decode_unitary()?;
            if u.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: u.nrows(),
                }
                .into());
            }
            u
        }
        None => CMatrix::identity(n, n),
    };
    let out = a.out.as_deref();
    match a.metric {
        Metric::Efid => {
            inputs.extend(a.state.as_deref());
            let rho = match &a.state {
                Some(p) => read::<StateFile>(p)?.decode(validation)?,
                None => DensityMatrix::maximally_mixed(n),
            };
            let value = match &channel {
                Channel::Kraus(op) => entanglement_fidelity_kraus(&rho, &target, op)?,
                Channel::Chi(chi) => entanglement_fidelity_chi(&rho, &target, chi)?,
            };
            emit_json(
                out,
                &EntanglementFidelityJson::new(manifest("metrics", &inputs), value),
            )
        }
        Metric::Minfid => {
            let report = min_fidelity(&target, &channel.to_kraus()?)?;
            emit_json(
                out,
                &MinFidelityJson::new(manifest("metrics", &inputs), &report),
            )
        }
        Metric::Capacity => {
            let report = channel_capacity(&channel.to_kraus()?)?;
            emit_json(
                out,
                &CapacityJson::new(manifest("metrics", &inputs), &report),
            )
        }
        Metric::Lindblad => {
            let generator = lindblad_log(&channel.to_superoperator())?;
            emit_json(
                out,
                &LindbladJson::new(manifest("metrics", &inputs), &generator),
            )
        }
    }
}

fn branch_chi(label: &str, chi: &ChiMatrix) -> Result<BranchChiJson> {
    match ChannelFile::from_chi(chi)?.body {
        ChannelBody::Chi {
            dim,
            basis,
            matrix,
            trace_preserving,
        } => Ok(BranchChiJson {
            label: label.to_string(),
            dim,
            basis,
            matrix,
            trace_preserving,
        }),
        _ => unreachable!("from_chi writes a chi body"),
    }
}

fn measure(a: &MeasureArgs, validation: Validation) -> Result<()> {
    let model = read::<InstrumentFile>(&a.instrument)?
        .decode(validation)
        .with_context(|| format!("invalid instrument in {}", a.instrument.display()))?;
    let solver = ChiSolver::for_dim(model.dim())?;
    let seed = a.seed.seed;
    let mut m = manifest("measure", &[&a.instrument]);

    if !a.all_branches {
        let label = a
            .branch
            .as_deref()
            .expect("clap requires --branch or --all-branches");
        model.branch(label)?;
        let data: BranchDataset = match &a.data {
            Some(p) => {
                m.inputs.push(p.display().to_string());
                let data = read::<BranchDatasetFile>(p)?.decode(validation)?;
                if data.label() != label {
                    return Err(Coded::new(
                        exit::MALFORMED,
                        format!("dataset is for branch {:?}, not {label:?}", data.label()),
                    )
                    .into());
                }
                if data.dim() != model.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: model.dim(),
                        found: data.dim(),
                    }
                    .into());
                }
                data
            }
            None => simulate_branch_dataset(&model, label, a.trials, a.shots, seed)?,
        };
        m.seed = Some(data.seed());
        m.shots = Some(data.trials());
        if let Some(p) = &a.save_data {
            emit_json(
                Some(p),
                &BranchDatasetFile::from_dataset(&data).with_manifest(m.clone()),
            )?;
        }
        let chi = reconstruct_branch_with(&solver, &data)?;
        return emit_json(
            a.out.as_deref(),
            &ChannelFile::from_chi(&chi)?.with_manifest(m),
        );
    }

    m.seed = Some(seed);
    m.shots = Some(a.trials);
    let mut branches = Vec::new();
    let mut total: Option<CMatrix> = None;
    for label in model.labels() {
        let data = simulate_branch_dataset(&model, label, a.trials, a.shots, seed)?;
        let chi = reconstruct_branch_with(&solver, &data)?;
        let sup = chi.to_superoperator();
        total = Some(match total {
            Some(t) => t + sup.matrix(),
            None => sup.matrix().clone(),
        });
        branches.push(branch_chi(label, &chi)?);
    }
    let total = Superoperator::new(model.dim(), total.expect("instrument has a branch"))?;
    emit_json(
        a.out.as_deref(),
        &InstrumentReconstructionJson {
            manifest: m,
            branches,
            sum_trace_defect: report_number(total.trace_preservation_defect()),
        },
    )
}

/// Identifies the file kind by its keys and decodes it with strict
/// validation.
fn verify(path: &Path) -> Result<()> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Malformed(e.to_string()))
        .with_context(|| format!("cannot parse {}", path.display()))?;
    let has = |key: &str| value.get(key).is_some();
    let strict = Validation::Strict;
    let kind = if has("kind") {
        let file: ChannelFile = format::from_json(&text)?;
        let channel = file.decode(strict)?;
        let form = match channel {
            Channel::Kraus(_) => "kraus",
            Channel::Chi(_) => "chi",
        };
        format!("channel ({form}, dim {})", channel.dim())
    } else if has("branches") {
        let model = format::from_json::<InstrumentFile>(&text)?.decode(strict)?;
        format!(
            "instrument ({} branches, dim {})",
            model.branches().len(),
            model.dim()
        )
    } else if has("records") && has("label") {
        let data = format::from_json::<BranchDatasetFile>(&text)?.decode(strict)?;
        format!("branch dataset ({:?}, dim {})", data.label(), data.dim())
    } else if has("records") {
        let data = format::from_json::<DatasetFile>(&text)?.decode(strict)?;
        format!("dataset (dim {}, shots {})", data.dim(), data.shots())
    } else if has("rho") {
        let rho = format::from_json::<StateFile>(&text)?.decode(strict)?;
        format!("state (dim {})", rho.dim())
    } else {
        return Err(
            Error::Malformed(format!("{} is not a recognized qpt file", path.display())).into(),
        );
    };
    println!("ok: {kind}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_numbers_hide_rounding_noise() {
        assert_eq!(report_number(-3e-17), 0.0);
        assert_eq!(report_number(0.1 + 0.2), 0.3);
        assert_eq!(report_number(-1e-9), -1e-9);
    }

    #[test]
    fn chi_vector_is_row_major() {
        let basis = qpt_core::channel::standard_basis(1);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = qpt_core::numerics::c64(1.0, 0.0);
        m[(0, 1)] = qpt_core::numerics::c64(0.0, 0.5);
        m[(1, 0)] = qpt_core::numerics::c64(0.0, -0.5);
        let chi = ChiMatrix::new(basis, m, false, Validation::Lenient).unwrap();
        let v = chi_vector(&chi);
        assert_eq!(v[1], qpt_core::numerics::c64(0.0, 0.5));
        assert_eq!(v[4], qpt_core::numerics::c64(0.0, -0.5));
    }
}
