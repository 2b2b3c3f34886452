//! `isogeom` command-line runner.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isogeom::experiment::{self, ExperimentConfig, ExperimentKind, ExperimentReport, Verdict};
use isogeom::par::with_threads;
use isogeom::Error;

/// Seed used by `selftest` when neither a config nor `--seed` supplies one.
const SELFTEST_SEED: u64 = 20240601;

#[derive(Parser, Debug)]
#[command(name = "isogeom", version, about = "Seeded experiments on isotropic projections, slices and Heisenberg sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Report destination (default: the config's `output`, else stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Dimension of projections onto random isotropic subspaces.
    Project,
    /// Overlap of the projections of two sets.
    Intersect,
    /// Slice dimension and the sliced-mass identity.
    Slice,
    /// Both sides of the isotropic disintegration identity.
    Disintegrate,
    /// Heisenberg slice, dimension-drop and intersection probes.
    Heisenberg,
    /// The full acceptance suite.
    Selftest,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Project => ExperimentKind::Project,
            Command::Intersect => ExperimentKind::Intersect,
            Command::Slice => ExperimentKind::Slice,
            Command::Disintegrate => ExperimentKind::Disintegrate,
            Command::Heisenberg => ExperimentKind::Heisenberg,
            Command::Selftest => ExperimentKind::Selftest,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let kind = cli.command.kind();
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if kind == ExperimentKind::Selftest => ExperimentConfig::with_seed(SELFTEST_SEED),
        None => return Err(Failure::Config(format!("{} needs --config PATH", kind.name()))),
    };
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if cli.threads == Some(0) {
        return Err(Failure::Config("--threads must be ≥ 1".into()));
    }
    Ok(config)
}

fn render(report: &ExperimentReport, format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    })
}

fn write_output(cli: &Cli, config: &ExperimentConfig, text: &str) -> Result<(), Failure> {
    let dest = cli.out.clone().or_else(|| config.output.as_ref().map(PathBuf::from));
    match dest {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let config = load_config(cli)?;
    let kind = cli.command.kind();
    let report = with_threads(cli.threads, || experiment::run(kind, &config))??;
    write_output(cli, &config, &render(&report, cli.format)?)?;
    for (id, verdict) in &report.verdicts {
        eprintln!("{id}: {verdict:?}");
    }
    eprintln!("runtime {:.1}s", report.runtime_seconds);
    let failed = report.verdicts.values().any(|v| *v == Verdict::Fail);
    Ok(if kind == ExperimentKind::Selftest && failed {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
