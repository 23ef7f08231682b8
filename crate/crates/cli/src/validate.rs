//! Model assessment: structural checks on the influence graph plus sampled
//! checks of the bias-factor conditions, classified into hard failures
//! (exit 2) and warnings (exit 0).
//!
//! Plain weighted averaging — a factor pinned at 1 on every edge — is treated
//! specially: it can never satisfy the strict-discount condition, yet it is a
//! perfectly legitimate classic model whose convergence is governed by the
//! fixed update matrix instead. Its discount failure is therefore reported as
//! a warning, not an error.

use std::path::Path;

use opinion_core::{
    validate_bias_conditions, AgentId, BiasSpec, ConditionReport, OpinionModel, SamplingPlan,
};

use crate::config::{load_config, build_model};
use crate::error::CliError;
use crate::output::{resolve_file, resolve_out_dir, write_json};

/// Everything `validate` prints and `simulate` gates on.
pub struct Assessment {
    pub agents: usize,
    pub edges: usize,
    pub strongly_connected: bool,
    pub isolated: Vec<AgentId>,
    pub family: String,
    /// True when the factor is identically 1 (plain weighted averaging).
    pub classic_mode: bool,
    pub conditions: ConditionReport,
    pub info: Vec<String>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl Assessment {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Name of the factor family as it appears in config files.
fn family_name(bias: &BiasSpec) -> String {
    serde_json::to_value(bias)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_owned))
        .unwrap_or_else(|| "unknown".to_owned())
}

/// Runs every check against the model, anchoring the sampled factor
/// conditions at the model's initial state so the verdict speaks about the
/// run the user is actually about to make.
pub fn assess_model(model: &OpinionModel) -> Result<Assessment, CliError> {
    let n = model.graph.agent_count();
    let classic_mode = model.bias.is_plain_averaging();
    let plan = SamplingPlan::default().with_anchor(model.initial.as_slice().to_vec());
    let conditions =
        validate_bias_conditions(&model.graph, &model.bias, &plan).map_err(CliError::invalid)?;

    let strongly_connected = model.graph.is_strongly_connected();
    let isolated = model.graph.normalized().isolated_agents();

    let mut info = Vec::new();
    let mut warnings = Vec::new();
    let mut failures = Vec::new();

    if !strongly_connected {
        failures.push(
            "influence graph is not strongly connected; consensus needs a directed \
             influence path between every ordered pair of agents"
                .to_owned(),
        );
    }

    if !conditions.continuity.passed {
        failures.push(format!(
            "factor continuity fails: jump {} between states {} apart exceeds the budget {}",
            conditions.continuity.max_jump, plan.epsilon, conditions.continuity.budget
        ));
    }

    if !conditions.positivity.passed {
        let detail = match conditions.positivity.first_violation {
            Some((state, agent, neighbor)) => format!(
                " (first: factor of agent {agent} toward agent {neighbor} is not positive \
                 in sampled state {state})"
            ),
            None => String::new(),
        };
        failures.push(format!(
            "factor positivity fails in {} of {} sampled states{detail}",
            conditions.positivity.violations, conditions.restraint.states_checked
        ));
    }

    if !conditions.restraint.passed {
        let agents: Vec<String> =
            conditions.restraint.anchor_failures.iter().map(|(_, a)| a.to_string()).collect();
        if classic_mode {
            warnings.push(
                "plain weighted averaging keeps factor 1 on every edge, so no agent ever \
                 discounts a neighbor; the strict-discount consensus argument does not \
                 apply. Convergence is instead governed by the fixed averaging matrix \
                 (see `analyze` for its spectrum)"
                    .to_owned(),
            );
        } else if agents.is_empty() {
            failures.push(format!(
                "discount condition fails: {} of {} sampled states have an agent whose \
                 every in-neighbor keeps factor 1",
                conditions.restraint.sampled_failures, conditions.restraint.states_checked
            ));
        } else {
            failures.push(format!(
                "discount condition fails at the initial state: agent(s) {} weight every \
                 in-neighbor at factor 1",
                agents.join(", ")
            ));
        }
    } else if conditions.restraint.sampled_failures > 0 {
        info.push(format!(
            "discount condition holds at the initial state; {} of {} random sampled states \
             would violate it elsewhere in the opinion cube",
            conditions.restraint.sampled_failures, conditions.restraint.states_checked
        ));
    }

    if classic_mode {
        // An agent fed entirely by one other agent copies that agent verbatim
        // under plain averaging — worth flagging even when the model is valid.
        for agent in 1..=n {
            let neighbors = model.graph.in_neighbors(agent).map_err(CliError::invalid)?;
            if neighbors.len() == 1 && !neighbors.contains(&agent) {
                let source = neighbors.iter().next().copied().unwrap_or(agent);
                warnings.push(format!(
                    "agent {agent} has a single in-neighbor (agent {source}) and no \
                     self-loop; under plain averaging it copies agent {source} every step"
                ));
            }
        }
    }

    Ok(Assessment {
        agents: n,
        edges: model.graph.edge_count(),
        strongly_connected,
        isolated,
        family: family_name(&model.bias),
        classic_mode,
        conditions,
        info,
        warnings,
        failures,
    })
}

fn yes_no(v: bool) -> &'static str {
    if v {
        "yes"
    } else {
        "no"
    }
}

/// Human-readable report on stdout.
pub fn print_assessment(a: &Assessment) {
    println!("agents: {}, edges: {}", a.agents, a.edges);
    println!("factor family: {}", a.family);
    println!("strongly connected: {}", yes_no(a.strongly_connected));
    if a.isolated.is_empty() {
        println!("agents without in-edges: none");
    } else {
        let ids: Vec<String> = a.isolated.iter().map(usize::to_string).collect();
        println!("agents without in-edges (they never move): {}", ids.join(", "));
    }
    println!("factor conditions (sampled; failures are definite, passes are heuristic):");
    let c = &a.conditions;
    println!(
        "  continuity: {} — max jump {} against budget {} over {} probe pairs ({} exempted)",
        if c.continuity.passed { "pass" } else { "FAIL" },
        c.continuity.max_jump,
        c.continuity.budget,
        c.continuity.pairs_checked,
        c.continuity.exempted_pairs
    );
    println!(
        "  positivity: {} — {} violation(s) across {} states",
        if c.positivity.passed { "pass" } else { "FAIL" },
        c.positivity.violations,
        c.restraint.states_checked
    );
    println!(
        "  discount:   {} at the initial state — also violated in {} random states ({} states checked in total)",
        if c.restraint.passed { "pass" } else { "FAIL" },
        c.restraint.sampled_failures,
        c.restraint.states_checked
    );
    println!("  note: {}", c.disclaimer);
    for line in &a.info {
        println!("info: {line}");
    }
    for line in &a.warnings {
        println!("warning: {line}");
    }
    for line in &a.failures {
        println!("invalid: {line}");
    }
    let verdict = if !a.is_valid() {
        "INVALID"
    } else if a.warnings.is_empty() {
        "valid"
    } else {
        "valid (with warnings)"
    };
    println!("verdict: {verdict}");
}

/// Machine-readable version of the same report.
pub fn assessment_json(a: &Assessment, origin: &str) -> serde_json::Value {
    serde_json::json!({
        "config": origin,
        "agents": a.agents,
        "edges": a.edges,
        "factor_family": a.family,
        "plain_averaging": a.classic_mode,
        "strongly_connected": a.strongly_connected,
        "agents_without_in_edges": a.isolated,
        "conditions": a.conditions,
        "info": a.info,
        "warnings": a.warnings,
        "failures": a.failures,
        "valid": a.is_valid(),
    })
}

/// The `validate` subcommand.
pub fn run_validate(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let model = build_model(&config)?;
    let assessment = assess_model(&model)?;
    println!("config: {}", config_path.display());
    print_assessment(&assessment);

    if let Some(report_rel) = config.outputs.report_path.as_deref() {
        let dir = resolve_out_dir(out);
        let path = resolve_file(&dir, Some(report_rel), "report.json");
        write_json(&assessment_json(&assessment, &config_path.display().to_string()), &path)?;
        println!("report written: {}", path.display());
    }

    if assessment.is_valid() {
        Ok(())
    } else {
        Err(CliError::invalid(assessment.failures.join("; ")))
    }
}
