use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "qchan", version, about = "Time-dependent one-qubit decoherence channels and their Markovianity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depolarizing channel from a qubit coupled to a spin bath.
    DepolSpinbath(SpinBathArgs),
    /// Depolarizing channel from a static isotropic Gaussian field.
    DepolClassical(ClassicalArgs),
    /// Dephasing from bosonic modes (discrete or continuum).
    DephasingQuantum(QuantumDephasingArgs),
    /// Dephasing from a classical Gaussian stationary field.
    DephasingClassical(ClassicalDephasingArgs),
    /// Amplitude damping by exchange of one excitation with bosonic modes.
    AmpDamping(DampingArgs),
    /// Decay rate and Markovianity verdict for a column of a CSV series.
    Analyze(AnalyzeArgs),
    /// Datasets behind the two reference figures.
    Reproduce(ReproduceArgs),
    /// Brute-force reference simulations next to the model values.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Output file (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of time steps; the grid has steps + 1 points.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Monte Carlo realizations (0 disables sampling).
    #[arg(long)]
    pub mc: Option<usize>,
    /// JSON file whose keys mirror the flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpinBathArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// fixed | gaussian | lorentzian | uniform | spin-star
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Environmental spin, e.g. 1, 3/2 or 1.5.
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mean: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub std_dev: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub half_width: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g_hi: Option<f64>,
    /// Number of environmental spins ½ for the spin-star ensemble.
    #[arg(long)]
    pub spins: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QuantumDephasingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One mode specified by frequency and weight |c|² coth(ωβ/2)/ω².
    #[arg(long)]
    pub single_mode: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub weight: Option<f64>,
    /// Discrete modes as "coupling:frequency,…".
    #[arg(long)]
    pub modes: Option<String>,
    /// Ohmic spectral density J = A ω e^{−ωτ}.
    #[arg(long)]
    pub ohmic: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub cutoff_time: Option<f64>,
    /// Two-column (ω, J) table.
    #[arg(long)]
    pub density_file: Option<String>,
    /// Inverse temperature; "inf" for zero temperature.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Absolute quadrature tolerance for continuum baths.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassicalDephasingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// cosine | white
    #[arg(long)]
    pub process: Option<String>,
    /// Cosine components as "sigma:frequency,…".
    #[arg(long)]
    pub cosines: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub intensity: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DampingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Qubit frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Coupling of a single resonant mode (ignored with --modes).
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Modes as "coupling:frequency,…".
    #[arg(long)]
    pub modes: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub file: PathBuf,
    /// Column to analyze; `f` is short for f_or_coherence.
    #[arg(long)]
    pub col: Option<String>,
    /// bloch-factor | probability | dephasing-gamma | damping-gamma
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_abs: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_rel: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Directory receiving fig1.csv or fig2.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub mc: usize,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Qubit ⊗ spin-l exact evolution against the closed-form factor.
    SpinBath(OracleSpinArgs),
    /// Single-excitation eigen-evolution against the amplitude solver.
    SingleExcitation(DampingArgs),
    /// Displaced-oscillator evolution against the discrete-mode exponent.
    Dephasing(OracleDephasingArgs),
}

#[derive(Debug, Args)]
pub struct OracleSpinArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleDephasingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub coupling: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}
