use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use qpt_core::tomography::Shots;

#[derive(Debug, Parser)]
#[command(
    name = "qpt",
    version,
    about = "Quantum process tomography from the command line"
)]
pub struct Cli {
    /// Check every input file against the strict type invariants.
    #[arg(long, global = true)]
    pub verify: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a tomography dataset for a channel.
    Generate(GenerateArgs),
    /// Reconstruct χ from a dataset.
    Reconstruct(ReconstructArgs),
    /// Convert a χ file to Kraus operators.
    Kraus(KrausArgs),
    /// Bloch-sphere affine map of a one-qubit channel, as CSV.
    Bloch(BlochArgs),
    /// Fidelity, capacity or Lindblad generator of a channel.
    Metrics(MetricsArgs),
    /// Simulate and reconstruct the operation attached to a measurement outcome.
    Measure(MeasureArgs),
    /// Validate a file and report its kind.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed; overrides QPT_SEED.
    #[arg(long, env = "QPT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Channel file (Kraus, χ or unitary).
    pub channel: PathBuf,
    /// Expected number of qubits.
    #[arg(long)]
    pub qubits: Option<u32>,
    /// Samples per Pauli observable, or "exact".
    #[arg(long, default_value = "exact")]
    pub shots: Shots,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    General,
    Closed1q,
    Closed2q,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::General)]
    pub method: Method,
    /// Replace χ by the nearest completely positive map.
    #[arg(long)]
    pub project_physical: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KrausArgs {
    pub chi: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlochArgs {
    pub channel: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Efid,
    Minfid,
    Capacity,
    Lindblad,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub channel: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Target unitary; the identity when omitted.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Input state for `efid`; maximally mixed when omitted.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["branch", "all_branches"])))]
pub struct MeasureArgs {
    pub instrument: PathBuf,
    #[arg(long)]
    pub branch: Option<String>,
    /// Reconstruct every branch and check that they sum to a channel.
    #[arg(long)]
    pub all_branches: bool,
    /// Repetitions per preparation used to estimate outcome probabilities.
    #[arg(long, default_value = "exact")]
    pub trials: Shots,
    /// Samples per Pauli observable for the post-measurement states.
    #[arg(long, default_value = "exact")]
    pub shots: Shots,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Reconstruct from this branch dataset instead of simulating.
    #[arg(long, conflicts_with = "all_branches")]
    pub data: Option<PathBuf>,
    /// Also write the simulated branch dataset.
    #[arg(long, conflicts_with_all = ["all_branches", "data"])]
    pub save_data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
}
