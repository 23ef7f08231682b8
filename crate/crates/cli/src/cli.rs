//! Command-line surface: subcommands, flags, and their help text.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::OutputFormat;
use crate::demo::DemoName;

#[derive(Debug, Parser)]
#[command(
    name = "ode",
    version,
    about = "Simulate and analyze biased opinion dynamics on influence graphs",
    long_about = "Simulate and analyze biased opinion dynamics on influence graphs.\n\
        Models are JSON files naming the agents, weighted influence edges, a bias \
        factor, and the initial opinions. Exit codes: 0 success, 2 invalid model, \
        3 simulation did not reach consensus, 4 unreadable or malformed input."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model: graph structure plus sampled factor conditions
    Validate {
        /// Model config file (JSON)
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Output directory for the optional JSON report
        /// (default: $ODE_OUT_DIR, then the current directory)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the synchronous opinion dynamics and write the trace
    Simulate {
        /// Model config file (JSON)
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Output directory (default: $ODE_OUT_DIR, then the current directory)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Consensus tolerance; overrides the config's run.tol
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
        /// Maximum steps; overrides the config's run.horizon
        #[arg(long, value_name = "STEPS")]
        horizon: Option<usize>,
        /// Simulate even when validation fails
        #[arg(long)]
        force: bool,
        /// Trace format; overrides the config's outputs.format
        #[arg(long, value_enum, value_name = "FMT")]
        format: Option<OutputFormat>,
    },
    /// Spectral report (stochasticity, irreducibility, primitivity, rho, second eigenvalue)
    Analyze {
        /// Model config file; the report covers its state-dependent update matrix
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// State to linearize at: a step index into the written trace (e.g. 17)
        /// or an inline opinion vector (e.g. 0.1,0.9). Default: the initial state
        #[arg(long, value_name = "T|VEC")]
        state: Option<String>,
        /// Analyze this matrix instead, as JSON rows, e.g. [[0.5,0.5],[0.2,0.8]]
        #[arg(long, value_name = "ROWS")]
        matrix: Option<String>,
        /// Output directory used to locate the trace and write the report
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Row-stochasticity tolerance (default 1e-9)
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
        /// Format of the trace file --state indexes into
        #[arg(long, value_enum, value_name = "FMT")]
        format: Option<OutputFormat>,
    },
    /// Run a bundled demonstration model
    Demo {
        /// Which demonstration to run
        #[arg(value_enum)]
        name: DemoName,
        /// Output directory; files land in a demo-<name> subdirectory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Consensus tolerance (example1, counterexample) or clustering
        /// tolerance (logistic)
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
        /// Maximum steps (example1, counterexample) or orbit length (logistic)
        #[arg(long, value_name = "STEPS")]
        horizon: Option<usize>,
        /// Trace format
        #[arg(long, value_enum, value_name = "FMT")]
        format: Option<OutputFormat>,
    },
    /// Simulate several configs in parallel, one subdirectory each
    Sweep {
        /// Model config files (repeat the flag or pass several values)
        #[arg(long = "config", value_name = "FILE", num_args = 1.., required = true)]
        configs: Vec<PathBuf>,
        /// Output directory; each run writes into <DIR>/<config stem>/
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Consensus tolerance applied to every run
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
        /// Maximum steps applied to every run
        #[arg(long, value_name = "STEPS")]
        horizon: Option<usize>,
        /// Simulate models even when validation fails
        #[arg(long)]
        force: bool,
        /// Trace format applied to every run
        #[arg(long, value_enum, value_name = "FMT")]
        format: Option<OutputFormat>,
    },
}
