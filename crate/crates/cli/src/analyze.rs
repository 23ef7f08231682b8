//! The `analyze` subcommand: spectral report for either the state-dependent
//! update matrix of a configured model or a raw matrix passed inline.
//!
//! The state can come from three places:
//! - omitted: the config's initial opinions;
//! - `--state 17`: row 17 of the previously written trace file;
//! - `--state 0.1,0.9` or `--state "[0.1,0.9]"`: an inline opinion vector.

use std::fs;
use std::path::Path;

use opinion_core::{
    analyze_matrix, build_update_matrix, MatrixReport, OpinionState, PowerIterationOptions,
    SquareMatrix,
};

use crate::config::{build_model, load_config, OutputFormat};
use crate::error::CliError;
use crate::output::{resolve_file, resolve_format, resolve_out_dir, trace_destination, write_json};

/// Default tolerance for the row-stochasticity check (`--tol` overrides).
pub const DEFAULT_STOCHASTIC_TOL: f64 = 1e-9;

fn parse_inline_matrix(text: &str) -> Result<SquareMatrix, CliError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| {
        CliError::input(format!("--matrix expects a JSON array of rows, e.g. [[0.5,0.5],[0.2,0.8]]: {e}"))
    })?;
    SquareMatrix::from_rows(&rows).map_err(CliError::invalid)
}

fn parse_inline_state(text: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = text.trim();
    let parse_err = |e: &dyn std::fmt::Display| {
        CliError::input(format!(
            "--state expects a step index (e.g. 17) or an opinion vector (e.g. 0.1,0.9): {e}"
        ))
    };
    if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| parse_err(&e))
    } else {
        trimmed.split(',').map(|cell| cell.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| parse_err(&e))
    }
}

/// Reads row `t` from a trace file written by `simulate` (CSV or JSON,
/// decided by extension).
fn state_from_trace(path: &Path, t: usize, agents: usize) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::input(format!(
            "no trace at {} ({e}); run `ode simulate` first or pass --state as a vector",
            path.display()
        ))
    })?;
    let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{} is not a JSON trace: {e}", path.display())))?;
        let states = doc
            .get("states")
            .and_then(|s| s.as_array())
            .ok_or_else(|| CliError::input(format!("{} has no states array", path.display())))?;
        let row = states.get(t).ok_or_else(|| {
            CliError::invalid(format!(
                "trace {} records steps 0..={}; step {t} was never reached",
                path.display(),
                states.len().saturating_sub(1)
            ))
        })?;
        let values: Vec<f64> = serde_json::from_value(row.clone())
            .map_err(|e| CliError::input(format!("malformed state row in {}: {e}", path.display())))?;
        return Ok(values);
    }
    // CSV: header `t,x_1,...,x_N,eta`, one row per recorded step.
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        let Some(step_cell) = cells.next() else { continue };
        if step_cell.trim() == t.to_string() {
            let cells: Vec<&str> = cells.collect();
            if cells.len() < agents {
                return Err(CliError::input(format!(
                    "trace row {t} in {} has {} columns after the step index, expected at \
                     least {agents}",
                    path.display(),
                    cells.len()
                )));
            }
            return cells[..agents]
                .iter()
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| {
                        CliError::input(format!("malformed trace cell in {}: {e}", path.display()))
                    })
                })
                .collect();
        }
    }
    let rows = text.lines().count().saturating_sub(1);
    Err(CliError::invalid(format!(
        "trace {} records {} steps; step {t} was never reached",
        path.display(),
        rows.saturating_sub(1)
    )))
}

/// The `analyze` subcommand. Exactly one of `config` / `matrix` must be set.
pub fn run_analyze(
    config_path: Option<&Path>,
    state: Option<&str>,
    matrix: Option<&str>,
    out: Option<&Path>,
    tol: Option<f64>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let stochastic_tol = tol.unwrap_or(DEFAULT_STOCHASTIC_TOL);
    let power = PowerIterationOptions::default();

    let (report, report_path): (MatrixReport, _) = match (config_path, matrix) {
        (None, Some(matrix_text)) => {
            if state.is_some() {
                return Err(CliError::input(
                    "--state only applies to a configured model; --matrix is analyzed as given",
                ));
            }
            let m = parse_inline_matrix(matrix_text)?;
            (analyze_matrix(&m, stochastic_tol, &power).map_err(CliError::invalid)?, None)
        }
        (Some(config_path), None) => {
            let config = load_config(config_path)?;
            let model = build_model(&config)?;
            let x = match state {
                None => model.initial.clone(),
                Some(text) if text.trim().chars().all(|c| c.is_ascii_digit()) && !text.trim().is_empty() => {
                    let t: usize = text.trim().parse().map_err(|e| {
                        CliError::input(format!("--state step index out of range: {e}"))
                    })?;
                    let dir = resolve_out_dir(out);
                    let trace_format = resolve_format(format, Some(&config));
                    let trace_path = trace_destination(&dir, &config, trace_format);
                    let values = state_from_trace(&trace_path, t, config.agents)?;
                    OpinionState::new(values).map_err(CliError::invalid)?
                }
                Some(text) => {
                    OpinionState::new(parse_inline_state(text)?).map_err(CliError::invalid)?
                }
            };
            let update = build_update_matrix(&model.graph, &model.bias, &x)
                .map_err(CliError::invalid)?;
            let report = analyze_matrix(update.as_matrix(), stochastic_tol, &power)
                .map_err(CliError::invalid)?;
            let report_path = config.outputs.report_path.as_deref().map(|rel| {
                let dir = resolve_out_dir(out);
                resolve_file(&dir, Some(rel), "report.json")
            });
            (report, report_path)
        }
        (Some(_), Some(_)) => {
            return Err(CliError::input("pass either --config or --matrix, not both"));
        }
        (None, None) => {
            return Err(CliError::input("analyze needs --config <file> or --matrix <rows>"));
        }
    };

    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::input(format!("cannot encode report: {e}")))?;
    println!("{body}");
    if let Some(path) = report_path {
        write_json(&report, &path)?;
        println!("report written: {}", path.display());
    }
    Ok(())
}
