//! `sica`: simulate condensate movies, extract oscillation modes, tabulate
//! cumulants and fit amplitude maps.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "sica", version, about = "Cumulant-matching mode extraction and condensate mode simulator")]
struct Cli {
    /// JSON run configuration; missing keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for noise and optimiser restarts (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a density movie and sample the detector traces.
    Simulate,
    /// Separate the channels of a detector CSV into single-frequency components.
    Extract(ExtractArgs),
    /// Tabulate empirical and reference cumulant-generating functions.
    Cumulants(CumulantArgs),
    /// Fit background and mode amplitude maps to a movie.
    Fit(FitArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Sica,
    Ica,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Detector CSV (`t,x1,...,xM`).
    pub detectors: PathBuf,
    #[arg(long, value_enum, default_value = "sica")]
    pub method: Method,
    /// Number of components; defaults to the number of channels.
    #[arg(long)]
    pub components: Option<usize>,
}

#[derive(Args)]
pub struct CumulantArgs {
    /// Component CSV (`t,s1,...,sN`).
    pub components: PathBuf,
    /// Comma-separated z values; defaults to the configured z grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    /// Solution JSON giving each component's statistics window.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Refinement round whose windows are used (with --solution); defaults to the last.
    #[arg(long, requires = "solution")]
    pub round: Option<usize>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "cumulants.csv")]
    pub name: String,
}

#[derive(Args)]
pub struct FitArgs {
    /// Movie directory written by `simulate`.
    pub movie: PathBuf,
    /// Three comma-separated mode frequencies.
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "solution")]
    pub frequencies: Option<Vec<f64>>,
    /// Take the frequencies from a solution JSON instead.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Also write `modemap.csv`.
    #[arg(long)]
    pub csv: bool,
    /// Fit sine columns next to the cosines.
    #[arg(long)]
    pub sine: bool,
}

/// Exit codes of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Config = 2,
    Numeric = 3,
    Io = 4,
}

impl Kind {
    fn label(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Config => "config",
            Kind::Numeric => "numeric",
            Kind::Io => "io",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn config(m: impl Into<String>) -> Self {
        Self { kind: Kind::Config, message: m.into() }
    }
    pub fn io(m: impl Into<String>) -> Self {
        Self { kind: Kind::Io, message: m.into() }
    }
    pub fn usage(m: impl Into<String>) -> Self {
        Self { kind: Kind::Usage, message: m.into() }
    }
}

impl From<sica_core::Error> for CliError {
    fn from(e: sica_core::Error) -> Self {
        use sica_core::Error as E;
        let kind = match &e {
            E::Io { .. } | E::Csv { .. } | E::UngriddedData { .. } | E::Json(_) => Kind::Io,
            E::InvalidParameter(_) => Kind::Config,
            _ => Kind::Numeric,
        };
        Self { kind, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(&CliError::usage(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let message = e.message.replace('\n', " ");
    eprintln!("error[{}]: {message}", e.kind.label());
    ExitCode::from(e.kind as u8)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::RunConfig::load(p)?,
        None => config::RunConfig::default(),
    };
    cfg.apply_overrides(cli.seed, cli.out);
    cfg.validate()?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Extract(a) => commands::extract(&cfg, &a),
        Command::Cumulants(a) => commands::cumulants(&cfg, &a),
        Command::Fit(a) => commands::fit(&cfg, &a),
    }
}
