//! Command-line front end: configuration, output formats and the six
//! subcommands. `main.rs` only maps results to exit codes.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

/// Environment variable that overrides the output directory (but not
/// `--out`). No other environment variables are read.
pub const OUT_ENV: &str = "BACON_CIRCUIT_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Failure while running; exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<bacon_circuit::Error> for CliError {
    fn from(e: bacon_circuit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "bacon-circuit", version, about = "Measurement-only Bacon-Shor circuit simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the file.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory; overrides the environment and the file.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble statistics for the configured point (`run.csv`).
    Run,
    /// One row per grid point of the `[sweep]` section (`sweep.csv`).
    Sweep,
    /// Correlation profiles against distance (`profile.csv`).
    Profile,
    /// Finite-size scaling collapse of sweep CSVs (`collapse.txt`,
    /// `collapse_points.csv`).
    Collapse(CollapseArgs),
    /// Site-class raster of one steady-state trajectory (`snapshot.pgm`,
    /// `snapshot.txt`, optionally `snapshot.svg`).
    Snapshot {
        /// Also write the SVG rendition.
        #[arg(long)]
        svg: bool,
    },
    /// Dense-oracle and symmetry-persistence self checks.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    /// Sweep CSV files.
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
    /// Column to collapse.
    #[arg(long, default_value = "Xr")]
    pub observable: String,
    /// Keep only rows with this p2 (required when several are present).
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub p_c: f64,
    /// Half-width of the p1 window around p_c.
    #[arg(long, default_value_t = 0.15)]
    pub window: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.3)]
    pub nu_min: f64,
    #[arg(long, default_value_t = 2.5)]
    pub nu_max: f64,
    /// Grid points per axis of the coarse scan.
    #[arg(long, default_value_t = 57)]
    pub grid: usize,
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    commands::dispatch(cli)
}
