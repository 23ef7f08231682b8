//! Built-in reference scenarios used by the demos and the test suites.
//!
//! Three scenarios are bundled:
//! - a six-agent strongly connected network with intergroup-assessment bias,
//!   showing convergence to a moderate consensus from polarized starts;
//! - a two-agent network with the position-dependent factor that no
//!   difference-only bias can reproduce;
//! - the classic logistic map at a period-2 parameter, as the worked
//!   dynamical-systems example.

use crate::bias::{BiasSpec, GroupPartition};
use crate::dynamics::{OpinionModel, OpinionState};
use crate::dynsys::{logistic_map, IteratedMap};
use crate::graph::InfluenceGraph;

/// The showcase six-agent influence graph: two sub-communities bridged by
/// agents 3 and 4, with a single return edge 6→1 closing the global cycle.
pub fn six_agent_graph() -> InfluenceGraph {
    InfluenceGraph::new(
        6,
        &[
            (1, 2, 0.6),
            (2, 1, 0.6),
            (2, 4, 0.4),
            (4, 6, 0.4),
            (1, 3, 0.4),
            (3, 5, 0.6),
            (5, 6, 0.6),
            (3, 4, 0.2),
            (4, 3, 0.2),
            (6, 1, 1.0),
        ],
    )
    .expect("the built-in six-agent graph is well-formed")
}

/// Polarized starting opinions for the six-agent scenario: extremists at both
/// ends, two moderates, and two lean-outward agents.
pub fn six_agent_initial() -> OpinionState {
    OpinionState::new(vec![0.0, 0.75, 0.1, 0.48, 0.52, 1.0])
        .expect("the built-in starting state is well-formed")
}

/// Six agents, intergroup-assessment bias with the default camp partition.
/// Converges to a single moderate consensus.
pub fn six_agent_intergroup() -> OpinionModel {
    let bias = BiasSpec::intergroup(GroupPartition::default())
        .expect("the default partition is well-formed");
    OpinionModel::new(six_agent_graph(), bias, six_agent_initial())
        .expect("the built-in six-agent model is well-formed")
}

/// Two mutually influencing agents carrying the position-dependent factor
/// `2(x₁−x₁²+¼)(1−0.9|x₁−x₂|)`, started at (0, 0.2).
///
/// The factor evaluates to 0.41 at (0, 0.2) and 0.82 at (0.5, 0.7) even
/// though both states have the same opinion difference — so no bias that
/// reads only the disagreement can imitate it.
pub fn counterexample_pair() -> OpinionModel {
    let graph = InfluenceGraph::new(2, &[(1, 2, 1.0), (2, 1, 1.0)])
        .expect("the built-in pair graph is well-formed");
    let initial = OpinionState::new(vec![0.0, 0.2]).expect("the built-in pair state is well-formed");
    OpinionModel::new(graph, BiasSpec::counterexample(), initial)
        .expect("the built-in pair model is well-formed")
}

/// The logistic map at μ = 3.4 with seed 0.3: orbits settle into a 2-cycle,
/// the bundled worked example for orbit and limit-set machinery.
pub fn logistic_reference() -> (IteratedMap, f64) {
    (logistic_map(3.4).expect("3.4 lies inside [0, 4]"), 0.3)
}
