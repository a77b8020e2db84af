//! `evigrid`: simulate recordings, build maps and compare variants.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use evigrid::{Error, GammaMode, MappingVariant};

#[derive(Debug, Parser)]
#[command(name = "evigrid", version, about = "Evidential occupancy mapping with fused deep and geometric radar models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a recording from a scenario file.
    Simulate { scenario: PathBuf, out: PathBuf },
    /// Run mapping variants over a recording and write maps, reports and renders.
    Map {
        config: PathBuf,
        #[arg(long)]
        unknown_floor: Option<f64>,
        #[arg(long, value_name = "paper|exact")]
        gamma_mode: Option<GammaMode>,
        /// Replaces the config's variant list; repeatable.
        #[arg(long = "variant", value_name = "VARIANT")]
        variants: Vec<MappingVariant>,
    },
    /// Print a table of per-class IoU from two or more reports.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
    },
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io { .. } => 3,
        Error::Invariant(_) | Error::Evidence(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate { scenario, out } => commands::simulate(scenario, out),
        Command::Map { config, unknown_floor, gamma_mode, variants } => {
            let overrides = config::Overrides {
                unknown_floor: *unknown_floor,
                gamma_mode: *gamma_mode,
                variants: variants.clone(),
            };
            commands::map(config, &overrides)
        }
        Command::Compare { reports } => commands::compare(reports),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
