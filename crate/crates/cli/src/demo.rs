//! The `demo` subcommand: three bundled, self-contained runs that exercise
//! the interesting corners of the engine without any config authoring.
//!
//! - `example1`: the six-agent camp model. Its influence graph is bipartite,
//!   so the synchronous dynamics lock into a period-2 oscillation instead of
//!   reaching consensus — the command exits with the non-convergence code on
//!   purpose.
//! - `counterexample`: a two-agent run whose bias factor provably cannot be
//!   written as any function of the opinion gap alone.
//! - `logistic`: a one-dimensional iterated map whose long-run behavior is a
//!   two-point attractor, found by the orbit-clustering estimator.

use std::path::Path;

use opinion_core::presets::{counterexample_pair, logistic_reference, six_agent_intergroup};
use opinion_core::{iterate_orbit, omega_limit_estimate, parity_split};

use crate::config::config_from_model;
use crate::error::CliError;
use crate::output::{resolve_out_dir, write_json};
use crate::simulate::{execute_run, print_run_summary, SimFlags};
use crate::validate::{assess_model, print_assessment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DemoName {
    /// Six agents in two camps on a bipartite influence graph.
    #[value(name = "example1")]
    Example1,
    /// A positional factor that no gap-only response can reproduce.
    #[value(name = "counterexample")]
    Counterexample,
    /// The logistic map settling onto a two-point attractor.
    #[value(name = "logistic")]
    Logistic,
}

impl DemoName {
    fn dir_name(self) -> &'static str {
        match self {
            DemoName::Example1 => "demo-example1",
            DemoName::Counterexample => "demo-counterexample",
            DemoName::Logistic => "demo-logistic",
        }
    }
}

pub fn run_demo(
    name: DemoName,
    out: Option<&Path>,
    flags: &SimFlags,
) -> Result<(), CliError> {
    let dir = resolve_out_dir(out).join(name.dir_name());
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    match name {
        DemoName::Example1 => demo_example1(&dir, flags),
        DemoName::Counterexample => demo_counterexample(&dir, flags),
        DemoName::Logistic => demo_logistic(&dir, flags),
    }
}

fn demo_example1(dir: &Path, flags: &SimFlags) -> Result<(), CliError> {
    let model = six_agent_intergroup();
    let config = config_from_model(&model);
    let config_path = dir.join("model.json");
    write_json(&config, &config_path)?;
    println!("six agents, two opinion camps, camp-based assessment of every neighbor");
    println!("config written: {} (re-run it with `ode simulate --config`)", config_path.display());

    let assessment = assess_model(&model)?;
    print_assessment(&assessment);

    // `print_assessment` already showed the info/warning lines that
    // `execute_run` would repeat in its notes, so those are dropped here.
    let outcome = execute_run(&config, &model, dir, flags)?;
    let options = crate::simulate::effective_options(&config, flags);
    print_run_summary(&outcome.trace, &options);
    println!("trace written: {}", outcome.trace_path.display());

    if outcome.converged() {
        return Ok(());
    }

    // Explain *why* it failed to settle when the tail shows an exact 2-cycle.
    let states = &outcome.trace.states;
    if states.len() >= 3 {
        let last = states[states.len() - 1].as_slice();
        let prev = states[states.len() - 2].as_slice();
        let before = states[states.len() - 3].as_slice();
        if last == before && last != prev {
            let mut levels: Vec<f64> = last.to_vec();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            let levels: Vec<String> = levels.iter().map(|v| format!("{v}")).collect();
            println!("diagnosis: the run locks into a period-2 oscillation, not consensus");
            println!("  phase A: {prev:?}");
            println!("  phase B: {last:?}");
            println!("  opinion levels in play: {}", levels.join(", "));
            println!(
                "  every influence edge crosses between the two camps (the graph is \
                 bipartite), so each synchronous step swaps the camps' opinions \
                 instead of mixing them"
            );
        }
    }
    Err(CliError::NotConverged(
        "the bundled six-agent run oscillates with period 2 and never meets the consensus \
         tolerance"
            .to_owned(),
    ))
}

fn demo_counterexample(dir: &Path, flags: &SimFlags) -> Result<(), CliError> {
    let model = counterexample_pair();
    let config = config_from_model(&model);
    let config_path = dir.join("model.json");
    write_json(&config, &config_path)?;

    let probe_a = [0.0, 0.2];
    let probe_b = [0.5, 0.7];
    let factor_a = model.bias.eval(&probe_a, 1, 2).map_err(CliError::invalid)?;
    let factor_b = model.bias.eval(&probe_b, 1, 2).map_err(CliError::invalid)?;
    println!("a factor that reads positions, not gaps:");
    println!(
        "  at opinions ({}, {}) the gap is 0.2 and the factor is {:.2} (exactly {factor_a})",
        probe_a[0], probe_a[1], factor_a
    );
    println!(
        "  at opinions ({}, {}) the gap is also 0.2 but the factor is {:.2} (exactly {factor_b})",
        probe_b[0], probe_b[1], factor_b
    );
    println!(
        "  any factor of the form g(|x_j - x_i|) must take one value per gap; this one \
         takes two different values on the same gap, so no gap-only response — linear, \
         damped, saturating, or otherwise — can reproduce it. The general form, which \
         lets the factor read the full opinion profile, expresses it directly."
    );
    println!("config written: {}", config_path.display());

    let outcome = execute_run(&config, &model, dir, flags)?;
    for note in &outcome.notes {
        println!("{note}");
    }
    let options = crate::simulate::effective_options(&config, flags);
    print_run_summary(&outcome.trace, &options);
    println!("trace written: {}", outcome.trace_path.display());
    if outcome.converged() {
        Ok(())
    } else {
        Err(CliError::NotConverged(
            "the two-agent run unexpectedly failed to reach consensus".to_owned(),
        ))
    }
}

fn demo_logistic(dir: &Path, flags: &SimFlags) -> Result<(), CliError> {
    let (map, x0) = logistic_reference();
    let steps = flags.horizon.unwrap_or(2_000);
    let burn_in = steps / 2;
    let cluster_tol = flags.tol.unwrap_or(1e-3);

    let orbit = iterate_orbit(&map, &[x0], steps).map_err(CliError::invalid)?;
    let orbit_path = dir.join("orbit.csv");
    let file = std::fs::File::create(&orbit_path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", orbit_path.display())))?;
    let mut file = std::io::BufWriter::new(file);
    orbit
        .write_csv(&mut file)
        .and_then(|()| std::io::Write::flush(&mut file))
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", orbit_path.display())))?;

    println!("map: {}, start {x0}, {steps} steps (first {burn_in} discarded as burn-in)", map.describe());
    let estimate = omega_limit_estimate(&orbit, burn_in, cluster_tol).map_err(CliError::invalid)?;
    println!(
        "long-run accumulation points (clustering tolerance {}):",
        estimate.cluster_tol
    );
    for (point, support) in estimate.accumulation_points.iter().zip(&estimate.support) {
        let coords: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        println!("  {} (visited by {support} of the kept points)", coords.join(", "));
    }
    if estimate.accumulation_points.len() == 2 {
        let split = parity_split(&orbit, burn_in).map_err(CliError::invalid)?;
        println!(
            "the orbit alternates: even steps sit at {} (spread {}), odd steps at {} (spread {})",
            split.even_representative[0], split.even_spread,
            split.odd_representative[0], split.odd_spread
        );
    }
    println!("orbit written: {}", orbit_path.display());
    Ok(())
}
