//! `hilbertine`: experiment driver and figure emitter.

mod commands;
mod config;
mod error;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Common, Outputs};
use config::load;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hilbertine", version, about = "Hilbert geometry experiments on convex projective domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Args {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for sampling-based checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the numerical tolerance of the config
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hilbert distance between two points
    Distance(Args),
    /// Dynamical family of a projective transformation
    Classify(Args),
    /// Busemann volume of a region, or the truncation profile of a pic
    Volume(Args),
    /// Dirichlet–Lee domain of a group
    Tile(Args),
    /// Dual domain
    Dual(Args),
    /// Approximate limit set of a group
    LimitSet(Args),
    /// Named experiment: ideal-triangle-scan, cusp-profile, dirichlet-tiling
    Run(Args),
}

fn write_outputs(dir: &Path, outputs: Outputs) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for (name, body) in outputs {
        let path = dir.join(&name);
        std::fs::write(&path, body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        println!("{}", path.display());
    }
    Ok(())
}

fn execute(cmd: &Command) -> CliResult<()> {
    let args = match cmd {
        Command::Distance(a)
        | Command::Classify(a)
        | Command::Volume(a)
        | Command::Tile(a)
        | Command::Dual(a)
        | Command::LimitSet(a)
        | Command::Run(a) => a,
    };
    config::positive("--tol", args.tol)?;
    let common = Common {
        seed: args.seed,
        tol: args.tol,
    };
    let path = args.config.as_path();
    let outputs = match cmd {
        Command::Distance(_) => commands::distance(&load(path)?, common)?,
        Command::Classify(_) => commands::classify_cmd(&load(path)?, common)?,
        Command::Volume(_) => commands::volume(&load(path)?, common)?,
        Command::Tile(_) => commands::tile(&load(path)?, common)?,
        Command::Dual(_) => commands::dual(&load(path)?, common)?,
        Command::LimitSet(_) => commands::limit_set(&load(path)?, common)?,
        Command::Run(_) => commands::run(&load(path)?, common)?,
    };
    write_outputs(&args.out, outputs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hilbertine: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
