//! Output routing: where files land and in which format.
//!
//! Precedence, highest first:
//! - output directory: `--out` flag, then the `ODE_OUT_DIR` environment
//!   variable, then the current directory;
//! - trace format: `--format` flag, then `outputs.format` in the config,
//!   then CSV.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use opinion_core::SimulationTrace;

use crate::config::{ModelConfig, OutputFormat};
use crate::error::CliError;

/// Environment variable consulted when `--out` is not given.
pub const OUT_DIR_ENV: &str = "ODE_OUT_DIR";

pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

pub fn resolve_format(flag: Option<OutputFormat>, config: Option<&ModelConfig>) -> OutputFormat {
    flag.or_else(|| config.and_then(|c| c.outputs.format)).unwrap_or(OutputFormat::Csv)
}

/// Resolves a configured path against the output directory (absolute paths
/// win), falling back to `default_name`.
pub fn resolve_file(dir: &Path, configured: Option<&Path>, default_name: &str) -> PathBuf {
    match configured {
        Some(p) if p.is_absolute() => p.to_path_buf(),
        Some(p) => dir.join(p),
        None => dir.join(default_name),
    }
}

/// Where the trace of `config` lands for the given directory and format.
pub fn trace_destination(dir: &Path, config: &ModelConfig, format: OutputFormat) -> PathBuf {
    resolve_file(dir, config.outputs.trace_path.as_deref(), format.trace_file_name())
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::input(format!("cannot create directory {}: {e}", parent.display()))
            })?;
        }
    }
    Ok(())
}

/// Writes the trace in the requested format, creating parent directories.
pub fn write_trace(
    trace: &SimulationTrace,
    path: &Path,
    format: OutputFormat,
) -> Result<(), CliError> {
    ensure_parent(path)?;
    let write_err =
        |e: std::io::Error| CliError::input(format!("cannot write {}: {e}", path.display()));
    match format {
        OutputFormat::Csv => {
            let file = fs::File::create(path).map_err(write_err)?;
            let mut file = std::io::BufWriter::new(file);
            trace.write_csv(&mut file).map_err(write_err)?;
            file.flush().map_err(write_err)?;
        }
        OutputFormat::Json => {
            let body = serde_json::to_string_pretty(trace)
                .map_err(|e| CliError::input(format!("cannot encode trace: {e}")))?;
            fs::write(path, body + "\n").map_err(write_err)?;
        }
    }
    Ok(())
}

/// Writes a pretty-printed JSON document, creating parent directories.
pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    ensure_parent(path)?;
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("cannot encode JSON for {}: {e}", path.display())))?;
    fs::write(path, body + "\n")
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
