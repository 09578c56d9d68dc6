//! The `unmix` command-line front end.
//!
//! Every subcommand reads optional defaults from `--config <file.toml>` (a flat
//! table whose keys are the long flag names with `_` for `-`); flags given on
//! the command line win. Exit codes: 0 success, 2 usage or configuration
//! error, 3 unreadable or malformed input, 4 numerical failure.

mod commands;
mod config;
mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::UnmixError;

pub use config::RunConfig;
pub use commands::median;
pub use plot::{abundance_pgm, trace_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Exit status for a failed command.
pub fn exit_code(err: &UnmixError) -> i32 {
    use UnmixError::*;
    match err {
        Io { .. }
        | Parse(_)
        | HeaderMismatch(_)
        | NonMonotoneWavelengths(_)
        | NegativeReflectance { .. }
        | NegativeLabel(_) => EXIT_IO,
        Numerical(_) | NotDescentDirection(_) | DegenerateData(_) | ZeroRow(_) | ZeroVector => {
            EXIT_NUMERIC
        }
        DimensionMismatch(_)
        | InvalidValue(_)
        | InvalidRank { .. }
        | RankMismatch { .. }
        | TooManyEndmembers { .. }
        | UnmappedLabel(_)
        | UnknownSignature(_)
        | IndivisibleDims { .. }
        | EmptyBlock { .. }
        | InvalidConfig(_) => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "unmix", version, about = "Hyperspectral unmixing with NMF and robust NMF")]
pub struct Cli {
    /// TOML file with default values for any flag (flag names, `_` for `-`)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a synthetic scene from a label map and a spectral library
    Simulate(SimulateArgs),
    /// Factor a cube or matrix into abundances and endmembers
    Unmix(UnmixArgs),
    /// Score estimated abundances and endmembers against the truth
    Evaluate(EvaluateArgs),
    /// Run NMF and robust NMF over several seeds and tabulate the scores
    Compare(CompareArgs),
    /// Draw a cost trace (SVG) or abundance maps (PGM)
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Nmf,
    Rnmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AscArg {
    None,
    Rownorm,
    Augment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    BlockMean,
    Gaussian,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Groundtruth label map (CSV of integers, 0 = unlabelled)
    #[arg(long, value_name = "CSV")]
    pub gt: Option<PathBuf>,
    /// Spectral library CSV (`wavelength_nm,<name>,...`)
    #[arg(long, value_name = "CSV")]
    pub library: Option<PathBuf>,
    /// Label to signature mapping, e.g. `1=vegetation,2=soil`
    #[arg(long, value_name = "LABEL=NAME,...")]
    pub map: Option<String>,
    /// Spatial downsampling factor d [default: 1]
    #[arg(long)]
    pub factor: Option<usize>,
    /// Spatial filter applied before block averaging [default: block-mean]
    #[arg(long, value_enum)]
    pub filter: Option<FilterArg>,
    /// Gaussian filter standard deviation in pixels [default: 1.0]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Signal-to-noise ratio of additive Gaussian noise in dB [default: no noise]
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Fraction of pixels replaced by outlier spectra [default: 0.02]
    #[arg(long)]
    pub outlier_frac: Option<f64>,
    /// Outlier amplitude relative to the scene maximum [default: 1.5]
    #[arg(long)]
    pub outlier_mag: Option<f64>,
    /// Noise seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Solver flags shared by `unmix` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Number of endmembers P
    #[arg(short = 'P', long = "endmembers")]
    pub endmembers: Option<usize>,
    /// Iteration cap [default: 500]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop when the relative cost change falls below this [default: 1e-6]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Sum-to-one handling for abundances [default: rownorm]
    #[arg(long, value_enum)]
    pub asc: Option<AscArg>,
    /// Constant appended by `--asc augment` [default: 10]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Factor initialisation [default: random]
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Floor for denominators and factor entries [default: 1e-12]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// First trial step of the Armijo search [default: 1.0]
    #[arg(long)]
    pub initial_step: Option<f64>,
    /// Backtracking factor of the Armijo search [default: 0.5]
    #[arg(long)]
    pub shrink: Option<f64>,
    /// Sufficient-decrease constant of the Armijo search [default: 1e-4]
    #[arg(long)]
    pub sufficient_decrease: Option<f64>,
    /// Maximum Armijo backtracks per block [default: 30]
    #[arg(long)]
    pub max_backtracks: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct UnmixArgs {
    /// Cube (`X`, `X.hdr` or `X.raw`) or matrix CSV (pixels x bands)
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Factorisation algorithm [default: rnmf]
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Initialisation seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvaluateArgs {
    /// Directory with `A_est.csv` and `E_est.csv` (or `A_true.csv`, `E_true.csv`)
    #[arg(long, value_name = "DIR")]
    pub est: Option<PathBuf>,
    /// Directory with `A_true.csv` and `E_true.csv`
    #[arg(long, value_name = "DIR")]
    pub truth: Option<PathBuf>,
    /// Report JSON path
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    /// Cube (`X`, `X.hdr` or `X.raw`) or matrix CSV (pixels x bands)
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Directory with `A_true.csv` and `E_true.csv`
    #[arg(long, value_name = "DIR")]
    pub truth: Option<PathBuf>,
    /// Comma-separated initialisation seeds [default: 0]
    #[arg(long, value_name = "S1,S2,...")]
    pub seeds: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Table JSON path
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PlotArgs {
    /// Trace CSV (`iteration,cost`) to draw as an SVG line chart
    #[arg(long, value_name = "CSV", conflicts_with = "abundance")]
    pub trace: Option<PathBuf>,
    /// Abundance CSV (pixels x endmembers) to draw as PGM maps
    #[arg(long, value_name = "CSV")]
    pub abundance: Option<PathBuf>,
    /// Raster rows of the abundance maps
    #[arg(long)]
    pub rows: Option<usize>,
    /// Raster columns of the abundance maps
    #[arg(long)]
    pub cols: Option<usize>,
    /// SVG file for `--trace`, directory for `--abundance`
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command, printing
/// diagnostics to stderr. Returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(cli: Cli) -> crate::Result<i32> {
    let config = match &cli.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args, &config),
        Command::Unmix(args) => commands::unmix(&args, &config),
        Command::Evaluate(args) => commands::evaluate(&args, &config),
        Command::Compare(args) => commands::compare(&args, &config),
        Command::Plot(args) => plot::run(&args, &config),
    }
}

fn require<T: Clone>(flag: &Option<T>, file: &Option<T>, name: &str) -> crate::Result<T> {
    flag.clone()
        .or_else(|| file.clone())
        .ok_or_else(|| UnmixError::InvalidConfig(format!("--{name} is required")))
}

fn create_dir(path: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(path).map_err(|e| UnmixError::io(path, e))
}
