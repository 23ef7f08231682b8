//! `ode` — a command-line front end for the opinion-dynamics engine.
//!
//! The library surface exists so integration tests can reach the config
//! schema and command implementations directly; the binary in `main.rs` is a
//! thin wrapper around [`run`].

pub mod analyze;
pub mod cli;
pub mod config;
pub mod demo;
pub mod error;
pub mod output;
pub mod simulate;
pub mod sweep;
pub mod validate;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, EXIT_INPUT};
use crate::simulate::SimFlags;

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config, out } => validate::run_validate(&config, out.as_deref()),
        Command::Simulate { config, out, tol, horizon, force, format } => {
            let flags = SimFlags { tol, horizon, force, format };
            simulate::run_simulate(&config, out.as_deref(), &flags)
        }
        Command::Analyze { config, state, matrix, out, tol, format } => analyze::run_analyze(
            config.as_deref(),
            state.as_deref(),
            matrix.as_deref(),
            out.as_deref(),
            tol,
            format,
        ),
        Command::Demo { name, out, tol, horizon, format } => {
            let flags = SimFlags { tol, horizon, force: false, format };
            demo::run_demo(name, out.as_deref(), &flags)
        }
        Command::Sweep { configs, out, tol, horizon, force, format } => {
            let flags = SimFlags { tol, horizon, force, format };
            sweep::run_sweep(&configs, out.as_deref(), &flags)
        }
    }
}

/// Parses the command line, runs the chosen command, and returns the process
/// exit code. Usage errors exit with the input-error code; `--help` and
/// `--version` exit 0.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
