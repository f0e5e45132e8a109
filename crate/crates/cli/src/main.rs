// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! `stmqc`: frequency planning, pulse simulation, gates and readout for
//! nuclear-spin chains in a field gradient.

mod artifact;
mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{CliError, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "stmqc",
    version,
    about = "Nuclear-spin chain planner and simulator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for written artifacts; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override a config value, `key=value` or `section.key=value`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frequency table and constraint report.
    Plan,
    /// Run a pulse-sequence file from a nuclear basis state.
    Simulate {
        #[arg(long, value_name = "PATH")]
        sequence: PathBuf,
        /// Initial nuclear bits, site 0 first (default all ground).
        #[arg(long, value_name = "BITS")]
        initial: Option<String>,
    },
    /// Control-Not between neighbouring nuclei.
    Gate {
        #[arg(long)]
        control: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
    },
    /// Synthesize and detect one electron readout trace.
    Readout {
        #[arg(long)]
        site: usize,
        #[arg(long, value_parser = ["ground", "excited"])]
        truth: String,
        /// Noise levels for a decision-rate sweep, comma separated.
        #[arg(long, value_delimiter = ',', value_name = "SIGMA")]
        noise: Vec<f64>,
        /// Trials per sweep point.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Measure every site and reset the excited nuclei.
    Init {
        /// Initial nuclear bits, site 0 first.
        #[arg(long, value_name = "BITS")]
        state: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("stmqc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let Global {
        config,
        seed,
        out,
        overrides,
    } = cli.global;
    let path = config.ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let ctx = commands::Context::load(&path, &overrides, seed, out)?;
    match cli.command {
        Command::Plan => commands::plan(&ctx),
        Command::Simulate { sequence, initial } => {
            commands::simulate(&ctx, &sequence, initial.as_deref())
        }
        Command::Gate { control, target } => commands::gate(&ctx, control, target),
        Command::Readout {
            site,
            truth,
            noise,
            trials,
        } => commands::readout(&ctx, site, truth == "excited", &noise, trials),
        Command::Init { state } => commands::init(&ctx, &state),
    }
}
