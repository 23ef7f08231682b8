//! The `simulate` subcommand: validate, run the synchronous dynamics, write
//! the trace, summarize, and signal non-convergence through the exit code.

use std::path::{Path, PathBuf};

use opinion_core::{simulate, OpinionModel, SimulationOptions, SimulationTrace};

use crate::config::{build_model, load_config, ModelConfig, OutputFormat};
use crate::error::CliError;
use crate::output::{resolve_format, resolve_out_dir, trace_destination, write_trace};
use crate::validate::assess_model;

/// Flags shared by `simulate` and `sweep`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimFlags {
    pub tol: Option<f64>,
    pub horizon: Option<usize>,
    pub force: bool,
    pub format: Option<OutputFormat>,
}

/// What one finished run looks like to the caller.
pub struct RunOutcome {
    pub trace: SimulationTrace,
    pub trace_path: PathBuf,
    /// Messages accumulated for the caller to print (warnings first).
    pub notes: Vec<String>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.trace.converged_at.is_some()
    }
}

pub fn effective_options(config: &ModelConfig, flags: &SimFlags) -> SimulationOptions {
    SimulationOptions {
        tolerance: flags.tol.unwrap_or(config.run.tol),
        horizon: flags.horizon.unwrap_or(config.run.horizon),
    }
}

/// Validates and runs one configured model, writing its trace under `dir`.
/// Returns `Ok` even when the run stalls — the caller decides how loudly a
/// missing consensus should fail.
pub fn execute_run(
    config: &ModelConfig,
    model: &OpinionModel,
    dir: &Path,
    flags: &SimFlags,
) -> Result<RunOutcome, CliError> {
    let mut notes = Vec::new();
    let assessment = assess_model(model)?;
    for line in &assessment.info {
        notes.push(format!("info: {line}"));
    }
    for line in &assessment.warnings {
        notes.push(format!("warning: {line}"));
    }
    if !assessment.is_valid() {
        if flags.force {
            for line in &assessment.failures {
                notes.push(format!("warning (--force overrides invalid model): {line}"));
            }
        } else {
            return Err(CliError::invalid(format!(
                "model failed validation: {}; pass --force to simulate it anyway",
                assessment.failures.join("; ")
            )));
        }
    }

    let options = effective_options(config, flags);
    let trace = simulate(model, &options).map_err(CliError::invalid)?;
    let format = resolve_format(flags.format, Some(config));
    let trace_path = trace_destination(dir, config, format);
    write_trace(&trace, &trace_path, format)?;
    Ok(RunOutcome { trace, trace_path, notes })
}

/// One-line-per-fact summary of a finished run, printed to stdout.
pub fn print_run_summary(trace: &SimulationTrace, options: &SimulationOptions) {
    println!(
        "run: tolerance {}, horizon {}, steps taken {}",
        options.tolerance,
        options.horizon,
        trace.states.len() - 1
    );
    match trace.converged_at {
        Some(step) => {
            println!("converged: yes, at step {step}");
            if let Some(value) = trace.consensus_value {
                println!("consensus: {value}");
            }
        }
        None => {
            println!("converged: no (horizon exhausted)");
            println!(
                "final max deviation from mean: {}",
                trace.final_state().max_deviation_from_mean()
            );
        }
    }
    println!("final disagreement norm: {}", trace.final_eta());
}

/// The `simulate` subcommand.
pub fn run_simulate(
    config_path: &Path,
    out: Option<&Path>,
    flags: &SimFlags,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let model = build_model(&config)?;
    let dir = resolve_out_dir(out);
    let outcome = execute_run(&config, &model, &dir, flags)?;
    for note in &outcome.notes {
        println!("{note}");
    }
    let options = effective_options(&config, flags);
    print_run_summary(&outcome.trace, &options);
    println!("trace written: {}", outcome.trace_path.display());
    if outcome.converged() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "no consensus within {} steps at tolerance {} (final max deviation from mean {})",
            options.horizon,
            options.tolerance,
            outcome.trace.final_state().max_deviation_from_mean()
        )))
    }
}
