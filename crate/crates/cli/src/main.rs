//! `concentrate`: command-line access to the concentration library.

mod commands;
mod error;
mod grid;
mod io;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "concentrate", version, about = "Entanglement concentration rates from Schmidt spectra")]
pub struct Cli {
    /// Report rates and exponents in bits instead of nats (inputs stay in nats).
    #[arg(long, global = true)]
    pub bits: bool,
    /// Seed for randomized oracles and the self-test.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal probabilistic and deterministic protocols for one spectrum.
    Protocol(ProtocolArgs),
    /// LOCC convertibility between two pure states.
    Majorize(MajorizeArgs),
    /// Finite-n information-spectrum quantities of an i.i.d. source.
    SpectrumRates(SpectrumRatesArgs),
    /// Asymptotic rates and exponents of an i.i.d. source.
    Rates(RatesArgs),
    /// Rates of a thermal state from its partition function.
    Thermal(ThermalArgs),
    /// Tail exponents from a log moment generating function.
    Ldp(LdpArgs),
    /// Uniform random-number generation by bucketing and its duality check.
    Randomness(RandomnessArgs),
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["x", "size", "sweep"])))]
pub struct ProtocolArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Threshold of the probabilistic protocol.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Target size of the maximally entangled output.
    #[arg(long)]
    pub size: Option<u64>,
    /// Threshold grid `min:max:step`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// With --size, also run the randomized fidelity search.
    #[arg(long, requires = "size")]
    pub oracle: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MajorizeArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumRatesArgs {
    /// Single-copy spectrum.
    #[arg(long)]
    pub iid: PathBuf,
    /// Copy counts, `min:max:step` or a single value.
    #[arg(long)]
    pub n: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// One of K, zeta, zeta_c, eta, zeta_half, zeta_c_half.
    #[arg(long, default_value = "zeta_c")]
    pub quantity: String,
    /// Report the fitted limit across n for each a instead of the raw values.
    #[arg(long)]
    pub fit: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    Const,
    Fail,
    SuccP,
    SuccD,
    Zeta,
    ZetaC,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("at").required(true).args(["r", "eps", "a", "sweep"])))]
pub struct RatesArgs {
    #[arg(long)]
    pub iid: PathBuf,
    #[arg(long, value_enum)]
    pub formula: Formula,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Grid of the formula's argument, `min:max:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("at").required(true).args(["r", "sweep"])))]
pub struct ThermalArgs {
    /// `[[energy, degeneracy], ...]` or `{"table": [[beta, xi], ...]}`.
    #[arg(long)]
    pub levels: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: f64,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("at").required(true).args(["a", "sweep"])))]
pub struct LdpArgs {
    #[arg(long)]
    pub mgf: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomnessArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Number of output values.
    #[arg(long = "M")]
    pub m: u64,
    #[arg(long, conflicts_with = "map")]
    pub greedy: bool,
    /// `{"M": .., "assignment": [..]}` with 1-based buckets.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(text) = std::env::var("CONCENTRATE_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("CONCENTRATE_THREADS='{text}' is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
