//! JSON file formats shared by the library and the command-line tool.
//!
//! Matrices are row-major lists of rows, each entry a `[re, im]` pair.
//! Numbers are rounded to 12 significant digits on output so that files are
//! byte-identical across platforms. Every file may carry a [`RunManifest`].

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::{
    ChiMatrix, DensityMatrix, KrausSet, OperatorBasis, Superoperator, Validation,
};
use crate::error::{Error, Result};
use crate::measurement::{BranchDataset, BranchRecord, Instrument};
use crate::numerics::{self, c64, CMatrix};
use crate::pauli;
use crate::tomography::{Shots, TomographyDataset};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

/// Rounds to [`SIGNIFICANT_DIGITS`] and folds `-0` into `0`.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn encode_matrix(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    [
                        round_significant(m[(i, j)].re),
                        round_significant(m[(i, j)].im),
                    ]
                })
                .collect()
        })
        .collect()
}

pub fn decode_matrix(rows: &MatrixJson) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if n == 0 || cols == 0 {
        return Err(Error::Malformed("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Malformed("ragged matrix rows".into()));
    }
    let m = CMatrix::from_fn(n, cols, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    numerics::check_finite(&m)?;
    Ok(m)
}

fn decode_square(rows: &MatrixJson, dim: usize) -> Result<CMatrix> {
    let m = decode_matrix(rows)?;
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim {
                m.nrows()
            } else {
                m.ncols()
            },
        });
    }
    Ok(m)
}

/// Provenance of an output file; enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<Shots>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, tool_version: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            seed: None,
            shots: None,
            tolerances: BTreeMap::new(),
            tool_version: tool_version.into(),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

/// Channel file body, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelBody {
    Kraus {
        dim: usize,
        operators: Vec<MatrixJson>,
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        trace_preserving: bool,
    },
    Chi {
        dim: usize,
        basis: String,
        matrix: MatrixJson,
        #[serde(default = "yes")]
        trace_preserving: bool,
    },
    Unitary {
        dim: usize,
        matrix: MatrixJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    #[serde(flatten)]
    pub body: ChannelBody,
}

/// A decoded channel file.
#[derive(Debug, Clone)]
pub enum Channel {
    Kraus(KrausSet),
    Chi(ChiMatrix),
}

impl Channel {
    pub fn dim(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim(),
            Channel::Chi(c) => c.dim(),
        }
    }

    pub fn is_trace_preserving(&self) -> bool {
        match self {
            Channel::Kraus(k) => k.is_trace_preserving(),
            Channel::Chi(c) => c.is_trace_preserving(),
        }
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        match self {
            Channel::Kraus(k) => Ok(k.clone()),
            Channel::Chi(c) => c.to_kraus(),
        }
    }

    pub fn to_superoperator(&self) -> Superoperator {
        match self {
            Channel::Kraus(k) => k.to_superoperator(),
            Channel::Chi(c) => c.to_superoperator(),
        }
    }
}

const STANDARD: &str = "standard";
const MATRIX_UNITS: &str = "matrix_units";

fn basis_named(name: &str, dim: usize) -> Result<OperatorBasis> {
    match name {
        STANDARD => pauli::qubit_count(dim)
            .map(OperatorBasis::standard)
            .ok_or(Error::NotQubitDimension(dim)),
        MATRIX_UNITS => Ok(OperatorBasis::matrix_units(dim)),
        other => Err(Error::Malformed(format!(
            "unknown operator basis {other:?}"
        ))),
    }
}

fn basis_name(basis: &OperatorBasis) -> Result<&'static str> {
    let dim = basis.dim();
    if let Some(k) = pauli::qubit_count(dim) {
        if basis.same_as(&OperatorBasis::standard(k)) {
            return Ok(STANDARD);
        }
    }
    if basis.same_as(&OperatorBasis::matrix_units(dim)) {
        return Ok(MATRIX_UNITS);
    }
    Err(Error::Malformed(
        "only the standard and matrix-unit bases can be written".into(),
    ))
}

impl ChannelFile {
    pub fn from_kraus(op: &KrausSet) -> Self {
        Self {
            manifest: None,
            body: ChannelBody::Kraus {
                dim: op.dim(),
                operators: op.operators().iter().map(encode_matrix).collect(),
                trace_preserving: op.is_trace_preserving(),
            },
        }
    }

    pub fn from_chi(chi: &ChiMatrix) -> Result<Self> {
        Ok(Self {
            manifest: None,
            body: ChannelBody::Chi {
                dim: chi.dim(),
                basis: basis_name(chi.basis())?.to_string(),
                matrix: encode_matrix(chi.matrix()),
                trace_preserving: chi.is_trace_preserving(),
            },
        })
    }

    pub fn with_manifest(mut self, manifest: RunManifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    pub fn decode(&self, validation: Validation) -> Result<Channel> {
        match &self.body {
            ChannelBody::Kraus {
                dim,
                operators,
                trace_preserving,
            } => {
                let ops = operators
                    .iter()
                    .map(|m| decode_square(m, *dim))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Channel::Kraus(KrausSet::with_validation(
                    ops,
                    *trace_preserving,
                    validation,
                )?))
            }
            ChannelBody::Chi {
                dim,
                basis,
                matrix,
                trace_preserving,
            } => {
                let basis = basis_named(basis, *dim)?;
                let m = decode_square(matrix, dim * dim)?;
                Ok(Channel::Chi(ChiMatrix::new(
                    basis,
                    m,
                    *trace_preserving,
                    validation,
                )?))
            }
            ChannelBody::Unitary { dim, matrix } => {
                let u = decode_square(matrix, *dim)?;
                Ok(Channel::Kraus(KrausSet::with_validation(
                    vec![u],
                    true,
                    validation,
                )?))
            }
        }
    }

    /// The single operator of a unitary or one-operator Kraus file.
    pub fn decode_unitary(&self) -> Result<CMatrix> {
        let m = match &self.body {
            ChannelBody::Unitary { dim, matrix } => decode_square(matrix, *dim)?,
            ChannelBody::Kraus { dim, operators, .. } if operators.len() == 1 => {
                decode_square(&operators[0], *dim)?
            }
            _ => {
                return Err(Error::Malformed(
                    "target must be a unitary or a single Kraus operator".into(),
                ))
            }
        };
        let defect = numerics::unitarity_defect(&m);
        if defect > 1e-9 {
            return Err(Error::NotUnitary { defect });
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    /// 1-based index of the input `|n⟩⟨m|`, `j = n·N + m + 1`.
    pub j: usize,
    pub rho: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub dim: usize,
    pub shots: Shots,
    pub seed: u64,
    pub records: Vec<RecordJson>,
}

fn check_indices(indices: impl Iterator<Item = usize>, dim: usize) -> Result<()> {
    let mut seen = vec![false; dim * dim];
    for j in indices {
        if j == 0 || j > dim * dim {
            return Err(Error::Malformed(format!(
                "record index {j} outside 1..={}",
                dim * dim
            )));
        }
        if std::mem::replace(&mut seen[j - 1], true) {
            return Err(Error::Malformed(format!("duplicate record index {j}")));
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::IncompleteDataset(format!(
            "record {} is missing",
            missing + 1
        )));
    }
    Ok(())
}

impl DatasetFile {
    pub fn from_dataset(data: &TomographyDataset) -> Self {
        Self {
            manifest: None,
            dim: data.dim(),
            shots: data.shots(),
            seed: data.seed(),
            records: data
                .records()
                .iter()
                .enumerate()
                .map(|(j, r)| RecordJson {
                    j: j + 1,
                    rho: encode_matrix(r),
                })
                .collect(),
        }
    }

    pub fn with_manifest(mut self, manifest: RunManifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    /// Strict validation also requires the outputs of the diagonal inputs
    /// `|n⟩⟨n|` to be Hermitian with unit trace.
    pub fn decode(&self, validation: Validation) -> Result<TomographyDataset> {
        let n = self.dim;
        check_indices(self.records.iter().map(|r| r.j), n)?;
        let mut records = vec![CMatrix::zeros(n, n); n * n];
        for r in &self.records {
            records[r.j - 1] = decode_square(&r.rho, n)?;
        }
        if validation == Validation::Strict {
            for k in 0..n {
                let out = &records[k * n + k];
                let defect = numerics::hermiticity_defect(out);
                let trace = out.trace();
                if defect > 1e-8 || (trace - c64(1.0, 0.0)).norm() > 1e-8 {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "output of input {} has hermiticity defect {defect:.3e} and trace {trace}",
                        k * n + k + 1
                    )));
                }
            }
        }
        TomographyDataset::new(n, self.shots, self.seed, records)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchJson {
    pub label: String,
    pub operators: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub dim: usize,
    pub branches: Vec<BranchJson>,
}

impl InstrumentFile {
    pub fn from_instrument(model: &Instrument) -> Self {
        Self {
            manifest: None,
            dim: model.dim(),
            branches: model
                .branches()
                .iter()
                .map(|(label, op)| BranchJson {
                    label: label.clone(),
                    operators: op.operators().iter().map(encode_matrix).collect(),
                })
                .collect(),
        }
    }

    pub fn decode(&self, validation: Validation) -> Result<Instrument> {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let ops = b
                    .operators
                    .iter()
                    .map(|m| decode_square(m, self.dim))
                    .collect::<Result<Vec<_>>>()?;
                Ok((
                    b.label.clone(),
                    KrausSet::with_validation(ops, false, validation)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Instrument::new(branches)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecordJson {
    /// 1-based preparation index.
    pub j: usize,
    pub p: f64,
    /// Absent when the outcome never occurred.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDatasetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub dim: usize,
    pub label: String,
    pub trials: Shots,
    pub seed: u64,
    pub records: Vec<BranchRecordJson>,
}

impl BranchDatasetFile {
    pub fn from_dataset(data: &BranchDataset) -> Self {
        Self {
            manifest: None,
            dim: data.dim(),
            label: data.label().to_string(),
            trials: data.trials(),
            seed: data.seed(),
            records: data
                .records()
                .iter()
                .enumerate()
                .map(|(j, r)| BranchRecordJson {
                    j: j + 1,
                    p: round_significant(r.p),
                    rho: r.state.as_ref().map(encode_matrix),
                })
                .collect(),
        }
    }

    pub fn with_manifest(mut self, manifest: RunManifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    /// Strict validation also requires each post-measurement state to be a
    /// density matrix.
    pub fn decode(&self, validation: Validation) -> Result<BranchDataset> {
        let n = self.dim;
        check_indices(self.records.iter().map(|r| r.j), n)?;
        let mut records = vec![
            BranchRecord {
                p: 0.0,
                state: None
            };
            n * n
        ];
        for r in &self.records {
            let state = match &r.rho {
                Some(m) => {
                    let m = decode_square(m, n)?;
                    if validation == Validation::Strict {
                        DensityMatrix::new(m.clone())?;
                    }
                    Some(m)
                }
                None => None,
            };
            records[r.j - 1] = BranchRecord { p: r.p, state };
        }
        BranchDataset::new(n, self.label.clone(), self.trials, self.seed, records)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub dim: usize,
    pub rho: MatrixJson,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            manifest: None,
            dim: rho.dim(),
            rho: encode_matrix(rho.matrix()),
        }
    }

    pub fn decode(&self, validation: Validation) -> Result<DensityMatrix> {
        DensityMatrix::with_validation(decode_square(&self.rho, self.dim)?, validation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{kraus_to_chi, models, standard_basis};
    use crate::measurement::simulate_branch_dataset;
    use crate::tomography::simulate_dataset;

    #[test]
    fn rounding() {
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_significant(-0.0), 0.0);
        assert!(round_significant(-0.0).is_sign_positive());
        assert_eq!(round_significant(123456789.0123456), 123456789.012);
        assert_eq!(round_significant(-2.5e-20), -2.5e-20);
    }

    #[test]
    fn matrix_json_shape() {
        let m = numerics::from_rows(&[
            &[c64(1.0, 0.0), c64(0.0, -1.0)],
            &[c64(0.5, 0.25), c64(-0.0, 0.0)],
        ]);
        let text = serde_json::to_string(&encode_matrix(&m)).unwrap();
        assert_eq!(text, "[[[1.0,0.0],[0.0,-1.0]],[[0.5,0.25],[0.0,0.0]]]");
        assert_eq!(decode_matrix(&encode_matrix(&m)).unwrap(), m);
        assert!(matches!(
            decode_matrix(&vec![vec![[1.0, 0.0]], vec![]]),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn channel_files_round_trip() {
        let op = models::amplitude_damping(0.19).unwrap();
        let file = ChannelFile::from_kraus(&op).with_manifest(RunManifest::new("test", "0"));
        let text = to_json(&file).unwrap();
        assert!(text.contains("\"kind\": \"kraus\""));
        let back: ChannelFile = from_json(&text).unwrap();
        assert_eq!(back, file);
        let sup = back.decode(Validation::Strict).unwrap().to_superoperator();
        assert!(sup.distance(&op.to_superoperator()).unwrap() < 1e-11);

        let chi = kraus_to_chi(&op, &standard_basis(1)).unwrap();
        let text = to_json(&ChannelFile::from_chi(&chi).unwrap()).unwrap();
        assert!(text.contains("\"basis\": \"standard\""));
        let back = from_json::<ChannelFile>(&text)
            .unwrap()
            .decode(Validation::Strict)
            .unwrap();
        assert!(back.is_trace_preserving());
        assert!(
            back.to_superoperator()
                .distance(&op.to_superoperator())
                .unwrap()
                < 1e-11
        );
    }

    #[test]
    fn channel_file_errors() {
        let bad_dim = r#"{"kind":"kraus","dim":3,"operators":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(
            from_json::<ChannelFile>(bad_dim)
                .unwrap()
                .decode(Validation::Strict),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            from_json::<ChannelFile>(r#"{"kind":"bogus","dim":2}"#),
            Err(Error::Malformed(_))
        ));
        let not_tp = r#"{"kind":"kraus","dim":2,"operators":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#;
        assert!(matches!(
            from_json::<ChannelFile>(not_tp)
                .unwrap()
                .decode(Validation::Strict),
            Err(Error::NotTracePreserving { .. })
        ));
        let unitary = r#"{"kind":"unitary","dim":2,"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#;
        let file = from_json::<ChannelFile>(unitary).unwrap();
        assert_eq!(file.decode_unitary().unwrap(), crate::pauli::sigma_x());
    }

    #[test]
    fn dataset_file_round_trip() {
        let data =
            simulate_dataset(&models::depolarizing(0.2).unwrap(), Shots::Count(1000), 7).unwrap();
        let text = to_json(&DatasetFile::from_dataset(&data)).unwrap();
        assert!(text.contains("\"shots\": 1000"));
        let back = from_json::<DatasetFile>(&text)
            .unwrap()
            .decode(Validation::Strict)
            .unwrap();
        assert_eq!(back.shots(), Shots::Count(1000));
        for (a, b) in back.records().iter().zip(data.records()) {
            assert!((a - b).norm() < 1e-11);
        }

        let exact = simulate_dataset(&KrausSet::identity(2), Shots::Exact, 0).unwrap();
        let mut file = DatasetFile::from_dataset(&exact);
        assert!(to_json(&file).unwrap().contains("\"shots\": \"exact\""));
        file.records.pop();
        assert!(matches!(
            file.decode(Validation::Lenient),
            Err(Error::IncompleteDataset(_))
        ));
        file.records.push(file.records[0].clone());
        assert!(matches!(
            file.decode(Validation::Lenient),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn instrument_and_branch_files_round_trip() {
        let model = Instrument::computational_basis(2);
        let text = to_json(&InstrumentFile::from_instrument(&model)).unwrap();
        let back = from_json::<InstrumentFile>(&text)
            .unwrap()
            .decode(Validation::Strict)
            .unwrap();
        assert_eq!(back.labels().collect::<Vec<_>>(), vec!["0", "1"]);

        let data = simulate_branch_dataset(&model, "0", Shots::Exact, Shots::Exact, 1).unwrap();
        let text = to_json(&BranchDatasetFile::from_dataset(&data)).unwrap();
        let back = from_json::<BranchDatasetFile>(&text)
            .unwrap()
            .decode(Validation::Strict)
            .unwrap();
        assert_eq!(back.label(), "0");
        for (a, b) in back.records().iter().zip(data.records()) {
            assert!((a.p - b.p).abs() < 1e-12);
            match (&a.state, &b.state) {
                (Some(x), Some(y)) => assert!((x - y).norm() < 1e-12),
                (None, None) => {}
                _ => panic!("state presence differs"),
            }
        }
    }

    #[test]
    fn state_file_validates() {
        let file = StateFile::from_state(&DensityMatrix::maximally_mixed(2));
        assert!(file.decode(Validation::Strict).is_ok());
        let bad: StateFile = from_json(r#"{"dim":2,"rho":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert!(matches!(
            bad.decode(Validation::Strict),
            Err(Error::InvalidDensityMatrix(_))
        ));
    }
}
