//! Command-line experiments on top of `ergokit`.
//!
//! Every subcommand builds one JSON report (keys sorted, floats rounded to
//! 12 significant digits, `"schema": 1`) and one plot-ready CSV table, and
//! writes whichever `--format` asks for to `--output` or stdout. Exit status
//! is 0 when every checked invariant holds, 1 when one fails and 2 on
//! unreadable or invalid input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

mod commands;
mod output;

pub use output::{round_sig, Table};

pub const SCHEMA_VERSION: u64 = 1;
pub const THREADS_ENV: &str = "ERGOKIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ergokit", version, about = "Ergotropy, relative entropy and work experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Inverse temperature.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub beta: f64,
    /// Hilbert-space dimension or number of grid cells.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Random cases or perturbations.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Allowed deviation for checked identities.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ergotropy of one state by every route.
    ///
    /// --input: {"rho": M, "hamiltonian": M} with M = {"dim", "entries": [[re, im], ...]}
    /// (row-major). Without it a random state and Hamiltonian are drawn from --seed.
    /// CSV columns: total, via_entropies, geometric, coherent, incoherent,
    /// dephased_ergotropy, passive_energy, beta.
    Ergotropy,
    /// Random sweeps of the ergotropy and relative-entropy identities.
    ///
    /// CSV columns: trial, rank, then one deviation column per identity.
    VerifyIdentities,
    /// Grid experiment: classical ergotropy, phi_B, brute-force pairing and
    /// stationarity probes.
    ///
    /// --input: CSV with columns index, E_A, E_B, weight (weight = initial
    /// distribution). Default: --dim cells with energies 0..dim-1 and all
    /// weight in the top cell.
    /// CSV columns: index, E_A, E_B, initial, final, phi_B.
    Classical(ClassicalArgs),
    /// Monte Carlo geometric partition function.
    ///
    /// --input: Hamiltonian matrix JSON; default diag(0, 1, ..., dim-1).
    /// CSV columns: dim, beta, samples, estimate, std_error, closed_form.
    GeometricZ,
    /// Work accounting and the sharpened maximum-work bound for a protocol.
    ///
    /// --input: {"h_a": M, "h_b": M, "path": "sudden" | "linear_ramp" |
    /// "schedule", "tau": t, "knots": [{"time": t, "hamiltonian": M}, ...]}.
    /// Default: diag(0, 1) to [[0, 0.5], [0.5, 1]].
    /// CSV columns: tau, n_steps, avg_work, delta_F, w_irr, beta_w_irr, bound,
    /// incoherent, coherence, population, jensen_slack.
    Otm(OtmArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ClassicalArgs {
    /// Kernel as dense JSON rows; default is the rearrangement that sorts the
    /// initial weights against the final energies.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Perturbation strength for the stationarity probe.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OtmArgs {
    /// Duration of a linear ramp for the default protocol; 0 means sudden.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Comma-separated durations to sweep with the default endpoints.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Starting step count before refinement.
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Input(#[from] ergokit::Error),
    #[error("computation failed: {0}")]
    Compute(ergokit::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Map<String, Value>,
    pub table: Table,
    /// One line per violated invariant.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.failures.is_empty())
    }
}

/// Sizes the global rayon pool from `ERGOKIT_THREADS` if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn validate(common: &Common) -> Result<(), CliError> {
    if !(common.beta > 0.0 && common.beta.is_finite()) {
        return Err(CliError::Config(format!("--beta must be positive, got {}", common.beta)));
    }
    if common.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    if !(common.tolerance > 0.0) {
        return Err(CliError::Config(format!("--tolerance must be positive, got {}", common.tolerance)));
    }
    Ok(())
}

/// Runs the subcommand and writes its output.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    validate(common)?;
    let (name, mut outcome) = match &cli.command {
        Command::Ergotropy => ("ergotropy", commands::ergotropy(common)?),
        Command::VerifyIdentities => ("verify-identities", commands::verify_identities(common)?),
        Command::Classical(args) => ("classical", commands::classical(common, args)?),
        Command::GeometricZ => ("geometric-z", commands::geometric_z(common)?),
        Command::Otm(args) => ("otm", commands::otm(common, args)?),
    };
    outcome.report.insert("schema".into(), SCHEMA_VERSION.into());
    outcome.report.insert("command".into(), name.into());
    outcome.report.insert("passed".into(), outcome.failures.is_empty().into());
    outcome.report.insert("failures".into(), outcome.failures.clone().into());
    let text = match common.format {
        Format::Json => output::render_json(&outcome.report),
        Format::Csv => outcome.table.render()?,
    };
    output::emit(common.output.as_deref(), &text)?;
    Ok(outcome)
}
