//! JSON reports and the Bloch CSV. Every number passes through
//! `round_significant` so output is byte-stable.

use anyhow::Result;
use nalgebra::Matrix3;
use qpt_core::bloch::{AffineMap, DecoherenceSummary, PolarFactors};
use qpt_core::format::{encode_matrix, round_significant as r, MatrixJson, RunManifest};
use qpt_core::metrics::{CapacityReport, FidelityReport, LindbladGenerator};
use qpt_core::numerics::CVector;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct EntanglementFidelityJson {
    pub manifest: RunManifest,
    pub metric: &'static str,
    pub value: f64,
}

impl EntanglementFidelityJson {
    pub fn new(manifest: RunManifest, value: f64) -> Self {
        Self {
            manifest,
            metric: "efid",
            value: r(value),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MinFidelityJson {
    pub manifest: RunManifest,
    pub metric: &'static str,
    pub value: f64,
    pub state: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pure_state: Option<Vec<[f64; 2]>>,
    pub method: String,
    pub evaluations: usize,
}

fn encode_vector(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [r(z.re), r(z.im)]).collect()
}

impl MinFidelityJson {
    pub fn new(manifest: RunManifest, report: &FidelityReport) -> Self {
        Self {
            manifest,
            metric: "minfid",
            value: r(report.value),
            state: encode_matrix(report.state.matrix()),
            pure_state: report.pure_state.as_ref().map(encode_vector),
            method: report.method.clone(),
            evaluations: report.evaluations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CapacityJson {
    pub manifest: RunManifest,
    pub metric: &'static str,
    pub capacity: f64,
    pub raw: f64,
    pub state: MatrixJson,
    pub output_entropy: f64,
    pub entropy_exchange: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub method: String,
    pub evaluations: usize,
}

impl CapacityJson {
    pub fn new(manifest: RunManifest, report: &CapacityReport) -> Self {
        Self {
            manifest,
            metric: "capacity",
            capacity: r(report.capacity),
            raw: r(report.raw),
            state: encode_matrix(report.state.matrix()),
            output_entropy: r(report.output_entropy),
            entropy_exchange: r(report.entropy_exchange),
            note: report.note.clone(),
            method: report.method.clone(),
            evaluations: report.evaluations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub t: f64,
    pub min_chi_eigenvalue: f64,
    pub valid: bool,
}

#[derive(Debug, Serialize)]
pub struct LindbladJson {
    pub manifest: RunManifest,
    pub metric: &'static str,
    pub generator: MatrixJson,
    pub round_trip_residual: f64,
    pub checks: Vec<CheckJson>,
    pub valid: bool,
}

impl LindbladJson {
    pub fn new(manifest: RunManifest, g: &LindbladGenerator) -> Self {
        Self {
            manifest,
            metric: "lindblad",
            generator: encode_matrix(g.generator.matrix()),
            round_trip_residual: r(g.round_trip_residual),
            checks: g
                .checks
                .iter()
                .map(|c| CheckJson {
                    t: c.t,
                    min_chi_eigenvalue: r(c.min_chi_eigenvalue),
                    valid: c.valid,
                })
                .collect(),
            valid: g.valid,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BranchChiJson {
    pub label: String,
    pub dim: usize,
    pub basis: String,
    pub matrix: MatrixJson,
    pub trace_preserving: bool,
}

#[derive(Debug, Serialize)]
pub struct InstrumentReconstructionJson {
    pub manifest: RunManifest,
    pub branches: Vec<BranchChiJson>,
    /// Distance of the summed branch superoperators from trace preservation.
    pub sum_trace_defect: f64,
}

fn entries(m: &Matrix3<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..3).flat_map(move |i| (0..3).map(move |j| m[(i, j)]))
}

fn names(prefix: &str) -> Vec<String> {
    (1..=3)
        .flat_map(|i| (1..=3).map(move |j| format!("{prefix}{i}{j}")))
        .collect()
}

/// One header row and one data row: `M`, `c`, the polar factors `O` and
/// `S`, the singular values of `M` and its determinant. A leading `#` line
/// carries the manifest.
pub fn bloch_csv(
    manifest: &RunManifest,
    map: &AffineMap,
    polar: &PolarFactors,
    summary: &DecoherenceSummary,
) -> Result<String> {
    let mut header = names("m");
    header.extend(["c1", "c2", "c3"].map(String::from));
    header.extend(names("o"));
    header.extend(names("s"));
    header.extend(["sv1", "sv2", "sv3", "det"].map(String::from));

    let mut row: Vec<f64> = entries(&map.m).collect();
    row.extend(map.c.iter().copied());
    row.extend(entries(&polar.o));
    row.extend(entries(&polar.s));
    row.extend(summary.singular_values);
    row.push(summary.determinant);

    let mut out = format!("# manifest: {}\n", serde_json::to_string(manifest)?).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&header)?;
        w.write_record(row.iter().map(|&x| r(x).to_string()))?;
        w.flush()?;
    }
    Ok(String::from_utf8(out)?)
}
