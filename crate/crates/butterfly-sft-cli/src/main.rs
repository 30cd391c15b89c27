//! `bsft`: generate curve/surface point sets, run the fast transform, verify
//! it against direct evaluation, and produce benchmark tables.

mod geospec;
mod run;
mod settings;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "bsft",
    version,
    about = "Sparse Fourier transforms on curves and surfaces via a butterfly scheme"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write source/target point-set files for a geometry configuration.
    Generate(CommonOpts),
    /// Run the fast transform and write one potential per target.
    Transform(TransformOpts),
    /// Run the transform plus a sampled direct check; report the error.
    Verify(CommonOpts),
    /// Sweep N and p combinations and emit a benchmark table.
    Bench(CommonOpts),
}

/// Options shared by the config-driven subcommands. Every flag can also be
/// given as `key = value` in `--config`; command-line flags win.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonOpts {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spatial dimension, 2 or 3.
    #[arg(long)]
    dim: Option<usize>,
    /// Domain size, a power of two >= 4 (bench: comma-separated list).
    #[arg(long)]
    n: Option<String>,
    /// Grid size per axis, 3..=15 (bench: comma-separated list).
    #[arg(long)]
    p: Option<String>,
    /// Sampling density: points per unit length (2D) or area (3D).
    #[arg(long)]
    density: Option<f64>,
    /// Seed for charges and sampling choices.
    #[arg(long)]
    seed: Option<u64>,
    /// Error-sample size for verify/bench.
    #[arg(long)]
    sample: Option<usize>,
    /// Target-side geometry, e.g. "ellipse", "circle:r=0.25", "star",
    /// "sphere:r=0.45", "torus:R=0.3,r=0.15", "mesh:model.obj".
    #[arg(long, value_name = "SPEC")]
    geometry_x: Option<String>,
    /// Source-side geometry (same syntax as --geometry-x).
    #[arg(long, value_name = "SPEC")]
    geometry_k: Option<String>,
    /// Output path (generate: file prefix; verify/bench: report file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for the level sweep; 1 = strictly serial, 0 = all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Full-precision numbers instead of 3 significant digits.
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TransformOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Source point-set file (must carry charges).
    #[arg(long)]
    sources: Option<PathBuf>,
    /// Target point-set file (must not carry charges).
    #[arg(long)]
    targets: Option<PathBuf>,
}

/// Process exit codes: 0 ok, 1 usage, 2 numerical failure, 3 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<butterfly_sft::Error> for CliError {
    fn from(e: butterfly_sft::Error) -> Self {
        use butterfly_sft::Error::*;
        match e {
            IllConditionedOperators { .. } => CliError::Numerical(e.to_string()),
            Io(_) | Parse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Generate(opts) => run::generate(&opts),
        Command::Transform(opts) => run::transform(&opts),
        Command::Verify(opts) => run::verify(&opts),
        Command::Bench(opts) => run::bench(&opts),
    };
    if let Err(err) = result {
        eprintln!("bsft: {}", err.message());
        std::process::exit(err.code());
    }
}
