//! On-disk model description: a single JSON document that names the agents,
//! the weighted influence edges, the bias factor, the initial opinions, and
//! optional run/output settings.
//!
//! ```json
//! {
//!   "version": 1,
//!   "agents": 2,
//!   "edges": [ { "src": 1, "dst": 2, "w": 1.0 }, { "src": 2, "dst": 1, "w": 1.0 } ],
//!   "initial": [0.0, 0.2],
//!   "bias": { "kind": "constant", "value": 0.5 },
//!   "run": { "horizon": 100000, "tol": 1e-8 },
//!   "outputs": { "trace_path": "trace.csv", "format": "csv" }
//! }
//! ```
//!
//! `run` and `outputs` may be omitted. Unknown top-level fields are rejected
//! so typos fail loudly instead of being silently ignored.

use std::fs;
use std::path::{Path, PathBuf};

use opinion_core::{AgentId, BiasSpec, InfluenceGraph, OpinionModel, OpinionState};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The only schema version this binary understands.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub version: u32,
    /// Number of agents; opinions and edge endpoints are 1-based up to this.
    pub agents: usize,
    pub edges: Vec<EdgeConfig>,
    /// Initial opinion per agent, each in `[0, 1]`.
    pub initial: Vec<f64>,
    pub bias: BiasSpec,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    /// Influencing agent (1-based).
    pub src: AgentId,
    /// Influenced agent (1-based).
    pub dst: AgentId,
    /// Positive influence weight; rows are normalized internally.
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Maximum number of synchronous update steps.
    pub horizon: usize,
    /// Consensus tolerance on the max deviation from the mean opinion.
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { horizon: 100_000, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    /// Where to write the trace, relative to the resolved output directory
    /// unless absolute. Defaults to `trace.csv` / `trace.json` by format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<PathBuf>,
    /// Where `validate` and `analyze` write their JSON report, if anywhere.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    /// Trace format; the `--format` flag overrides it. Defaults to CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn trace_file_name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "trace.csv",
            OutputFormat::Json => "trace.json",
        }
    }
}

/// Parses a config document; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ModelConfig, CliError> {
    let config: ModelConfig = serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("{origin}: not a valid model config: {e}")))?;
    if config.version != CONFIG_VERSION {
        return Err(CliError::input(format!(
            "{origin}: unsupported config version {} (this build reads version {CONFIG_VERSION})",
            config.version
        )));
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ModelConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

/// Builds the runnable model, turning any structural defect into an
/// invalid-model error (exit 2).
pub fn build_model(config: &ModelConfig) -> Result<OpinionModel, CliError> {
    let edges: Vec<(AgentId, AgentId, f64)> =
        config.edges.iter().map(|e| (e.src, e.dst, e.w)).collect();
    let graph = InfluenceGraph::new(config.agents, &edges).map_err(CliError::invalid)?;
    let initial = OpinionState::new(config.initial.clone()).map_err(CliError::invalid)?;
    OpinionModel::new(graph, config.bias.clone(), initial).map_err(CliError::invalid)
}

/// Reconstructs a config document from an in-memory model, so bundled demos
/// can drop a file the user can re-run and edit.
pub fn config_from_model(model: &OpinionModel) -> ModelConfig {
    let n = model.graph.agent_count();
    let mut edges = Vec::new();
    for src in 1..=n {
        for dst in 1..=n {
            if let Some(w) = model.graph.weight(src, dst) {
                edges.push(EdgeConfig { src, dst, w });
            }
        }
    }
    ModelConfig {
        version: CONFIG_VERSION,
        agents: n,
        edges,
        initial: model.initial.as_slice().to_vec(),
        bias: model.bias.clone(),
        run: RunConfig::default(),
        outputs: OutputsConfig::default(),
    }
}
