//! The `sweep` subcommand: run several configs in parallel, one worker
//! thread and one output subdirectory per config, then summarize each run on
//! a single line in input order. The process exit code is the most severe
//! code any individual run produced.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::config::{build_model, load_config};
use crate::error::CliError;
use crate::output::resolve_out_dir;
use crate::simulate::{execute_run, SimFlags};

fn sweep_one(config_path: &Path, dir: &Path, flags: &SimFlags) -> Result<String, CliError> {
    let config = load_config(config_path)?;
    let model = build_model(&config)?;
    let outcome = execute_run(&config, &model, dir, flags)?;
    let warnings = outcome.notes.len();
    let suffix = if warnings > 0 { format!(" ({warnings} note(s), see validate)") } else { String::new() };
    match (outcome.trace.converged_at, outcome.trace.consensus_value) {
        (Some(step), Some(value)) => Ok(format!(
            "converged at step {step}, consensus {value}, trace {}{suffix}",
            outcome.trace_path.display()
        )),
        (Some(step), None) => Ok(format!(
            "converged at step {step}, trace {}{suffix}",
            outcome.trace_path.display()
        )),
        (None, _) => Err(CliError::NotConverged(format!(
            "no consensus (final max deviation from mean {}), trace {}{suffix}",
            outcome.trace.final_state().max_deviation_from_mean(),
            outcome.trace_path.display()
        ))),
    }
}

/// Output subdirectory names: the config file stems, disambiguated by
/// position when two configs share a stem.
fn run_names(configs: &[PathBuf]) -> Vec<String> {
    let mut stem_counts: HashMap<String, usize> = HashMap::new();
    let stems: Vec<String> = configs
        .iter()
        .enumerate()
        .map(|(idx, path)| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("run-{idx}"))
        })
        .collect();
    for stem in &stems {
        *stem_counts.entry(stem.clone()).or_insert(0) += 1;
    }
    stems
        .into_iter()
        .enumerate()
        .map(|(idx, stem)| {
            if stem_counts[&stem] > 1 {
                format!("{stem}-{idx}")
            } else {
                stem
            }
        })
        .collect()
}

pub fn run_sweep(
    configs: &[PathBuf],
    out: Option<&Path>,
    flags: &SimFlags,
) -> Result<(), CliError> {
    if configs.is_empty() {
        return Err(CliError::input("sweep needs at least one --config <file>"));
    }
    let base = resolve_out_dir(out);
    let names = run_names(configs);

    let results: Vec<Result<String, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&names)
            .map(|(path, name)| {
                let dir = base.join(name);
                scope.spawn(move || sweep_one(path, &dir, flags))
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| {
                handle
                    .join()
                    .unwrap_or_else(|_| Err(CliError::invalid("simulation worker panicked")))
            })
            .collect()
    });

    let mut worst: Option<CliError> = None;
    let mut failures = 0usize;
    for (path, result) in configs.iter().zip(results) {
        match result {
            Ok(line) => println!("{}: {line}", path.display()),
            Err(e) => {
                println!("{}: failed (exit {}): {e}", path.display(), e.exit_code());
                failures += 1;
                let more_severe =
                    worst.as_ref().map_or(true, |w| e.exit_code() > w.exit_code());
                if more_severe {
                    worst = Some(e);
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(w) => {
            let rebuilt = format!("{failures} of {} runs failed; worst: {w}", configs.len());
            Err(match w {
                CliError::Input(_) => CliError::Input(rebuilt),
                CliError::Invalid(_) => CliError::Invalid(rebuilt),
                CliError::NotConverged(_) => CliError::NotConverged(rebuilt),
            })
        }
    }
}
