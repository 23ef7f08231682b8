//! Synchronous opinion dynamics on an influence graph.
//!
//! One update moves every agent toward its in-neighbors simultaneously:
//!
//! ```text
//! x_i' = x_i + Σ_j  w̄_{j,i} · α_{i,j}(x) · (x_j − x_i)
//! ```
//!
//! where `w̄` are the row-normalized influence weights and `α` the bias
//! factor. The same update can be written as `x' = A(x)·x` for a
//! state-dependent row-stochastic matrix `A(x)` ([`build_update_matrix`]);
//! both routes are provided and agree to rounding.
//!
//! [`simulate`] iterates the update until the state is consensual within a
//! tolerance or a horizon is hit, recording every state together with the
//! deviation norm `η(x) = ‖x − mean(x)·1‖₂` and which structural hypotheses
//! of the consensus argument held along the way.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::bias::{BiasError, BiasSpec, DisagreementBias};
use crate::graph::{AgentId, GraphError, InfluenceGraph, NormalizedInfluence};
use crate::matrix::SquareMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("opinion state must have at least one entry")]
    EmptyState,
    #[error("opinion entry {index} is {value}, expected a finite value in [0, 1]")]
    StateOutOfRange { index: usize, value: f64 },
    #[error("state has {got} entries but the graph has {expected} agents")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An opinion profile: one value in `[0, 1]` per agent.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OpinionState(Vec<f64>);

impl TryFrom<Vec<f64>> for OpinionState {
    type Error = DynamicsError;
    fn try_from(values: Vec<f64>) -> Result<Self, DynamicsError> {
        OpinionState::new(values)
    }
}

impl From<OpinionState> for Vec<f64> {
    fn from(s: OpinionState) -> Vec<f64> {
        s.0
    }
}

impl OpinionState {
    pub fn new(values: Vec<f64>) -> Result<Self, DynamicsError> {
        if values.is_empty() {
            return Err(DynamicsError::EmptyState);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(DynamicsError::StateOutOfRange { index, value });
            }
        }
        Ok(Self(values))
    }

    /// Consensual state `(value, ..., value)`.
    pub fn uniform(n: usize, value: f64) -> Result<Self, DynamicsError> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Largest absolute distance of any agent from the state mean; the
    /// consensus check compares this against a tolerance.
    pub fn max_deviation_from_mean(&self) -> f64 {
        let m = self.mean();
        self.0.iter().map(|&v| (v - m).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for OpinionState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Euclidean distance from the state to its consensual projection:
/// `η(x) = ‖x − mean(x)·1‖₂`. Zero exactly on consensual states.
pub fn disagreement_norm(x: &OpinionState) -> f64 {
    let m = x.mean();
    x.as_slice().iter().map(|&v| (v - m) * (v - m)).sum::<f64>().sqrt()
}

/// A graph, a bias factor, and an initial opinion profile.
#[derive(Debug, Clone)]
pub struct OpinionModel {
    pub graph: InfluenceGraph,
    pub bias: BiasSpec,
    pub initial: OpinionState,
}

impl OpinionModel {
    /// Bundles the parts, checking dimensions and the bias parameters.
    pub fn new(graph: InfluenceGraph, bias: BiasSpec, initial: OpinionState) -> Result<Self, DynamicsError> {
        if initial.len() != graph.agent_count() {
            return Err(DynamicsError::DimensionMismatch {
                expected: graph.agent_count(),
                got: initial.len(),
            });
        }
        bias.validate()?;
        Ok(Self { graph, bias, initial })
    }

    pub fn agent_count(&self) -> usize {
        self.graph.agent_count()
    }
}

/// One synchronous update in the per-agent sum form.
pub fn step(graph: &InfluenceGraph, bias: &BiasSpec, x: &OpinionState) -> Result<OpinionState, DynamicsError> {
    check_dim(graph, x)?;
    let norm = graph.normalized();
    let (values, _) = apply_update(&norm, bias, x.as_slice())?;
    OpinionState::new(values)
}

/// One synchronous update of the direct response dynamics
/// `x_i' = x_i + Σ_j w̄_{j,i}·beta(x_j − x_i)`: the response is applied to
/// the raw disagreement with no factor in between. Embedding the same
/// response as a bias factor and running [`step`] reproduces this map.
pub fn step_disagreement(
    graph: &InfluenceGraph,
    beta: &DisagreementBias,
    x: &OpinionState,
) -> Result<OpinionState, DynamicsError> {
    check_dim(graph, x)?;
    let norm = graph.normalized();
    let xs = x.as_slice();
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = xs[i];
        for &(j, w) in norm.row0(i) {
            if j != i {
                v += w * beta.eval(xs[j] - xs[i]);
            }
        }
        out.push(v.clamp(0.0, 1.0));
    }
    OpinionState::new(out)
}

/// The update written as a matrix: `x' = A(x)·x`.
///
/// Row `i` carries `w̄_{j,i}·α_{i,j}(x)` on its non-self in-neighbors and
/// keeps the remaining mass on the diagonal, so rows sum to 1 and all
/// entries are non-negative whenever the factors are admissible. Isolated
/// agents get an identity row.
#[derive(Debug, Clone)]
pub struct UpdateMatrix {
    matrix: SquareMatrix,
}

impl UpdateMatrix {
    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn into_inner(self) -> SquareMatrix {
        self.matrix
    }
}

/// Assembles `A(x)` for the given graph, bias, and state.
pub fn build_update_matrix(
    graph: &InfluenceGraph,
    bias: &BiasSpec,
    x: &OpinionState,
) -> Result<UpdateMatrix, DynamicsError> {
    check_dim(graph, x)?;
    let norm = graph.normalized();
    let xs = x.as_slice();
    let n = xs.len();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut moved = 0.0;
        for &(j, w) in norm.row0(i) {
            if j != i {
                let a = bias.eval(xs, i + 1, j + 1)?;
                m.set(i, j, w * a);
                moved += w * a;
            }
        }
        m.set(i, i, 1.0 - moved);
    }
    Ok(UpdateMatrix { matrix: m })
}

/// One synchronous update via the matrix route (`A(x)·x`).
pub fn step_matrix(graph: &InfluenceGraph, bias: &BiasSpec, x: &OpinionState) -> Result<OpinionState, DynamicsError> {
    let a = build_update_matrix(graph, bias, x)?;
    let values = a.as_matrix().mul_vec(x.as_slice());
    OpinionState::new(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Stopping rule for [`simulate`]: consensual when every agent is within
/// `tolerance` of the mean, giving up after `horizon` steps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimulationOptions {
    pub tolerance: f64,
    pub horizon: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, horizon: 100_000 }
    }
}

/// Which hypotheses of the consensus argument held for this run.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisNotes {
    /// Consensus for arbitrary initial opinions needs a strongly connected graph.
    pub strongly_connected: bool,
    /// Agents with no in-edges never move; they are reported, not an error.
    pub isolated_agents: Vec<AgentId>,
    /// Steps whose pre-update state had some agent weighting *all* non-self
    /// in-neighbors at factor 1 (nobody restrained): the per-state primitivity
    /// argument does not cover those steps.
    pub restraint_violation_steps: Vec<usize>,
}

/// Everything recorded along a simulated trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    /// Visited states; `states[0]` is the initial profile.
    pub states: Vec<OpinionState>,
    /// Deviation norm `η` per recorded state (same length as `states`).
    pub eta: Vec<f64>,
    /// First step index at which the consensus check passed, if any.
    pub converged_at: Option<usize>,
    /// Mean opinion at the converged state.
    pub consensus_value: Option<f64>,
    pub hypothesis: HypothesisNotes,
}

impl SimulationTrace {
    pub fn final_state(&self) -> &OpinionState {
        self.states.last().expect("trace always holds the initial state")
    }

    pub fn final_eta(&self) -> f64 {
        *self.eta.last().expect("trace always holds the initial state")
    }

    /// Writes the trajectory as CSV: header `t,x_1,...,x_N,eta`, one row per
    /// recorded state. Values are printed in shortest round-trip form, so
    /// re-parsing reproduces the exact bits and identical runs produce
    /// byte-identical files.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.final_state().len();
        write!(w, "t")?;
        for i in 1..=n {
            write!(w, ",x_{i}")?;
        }
        writeln!(w, ",eta")?;
        for (t, (state, eta)) in self.states.iter().zip(&self.eta).enumerate() {
            write!(w, "{t}")?;
            for &v in state.as_slice() {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{eta}")?;
        }
        Ok(())
    }
}

/// Iterates the update from the model's initial state until the consensus
/// check passes or `horizon` steps have been taken.
///
/// The check runs before each step, so a consensual initial state converges
/// at step 0 with no update applied. On a horizon exhaustion `converged_at`
/// is `None` and the trace holds `horizon + 1` states.
pub fn simulate(model: &OpinionModel, options: &SimulationOptions) -> Result<SimulationTrace, DynamicsError> {
    let norm = model.graph.normalized();
    let mut states = vec![model.initial.clone()];
    let mut eta = vec![disagreement_norm(&model.initial)];
    let mut restraint_violation_steps = Vec::new();
    let mut converged_at = None;

    for t in 0..=options.horizon {
        let current = states.last().expect("states never empty");
        if current.max_deviation_from_mean() < options.tolerance {
            converged_at = Some(t);
            break;
        }
        if t == options.horizon {
            break;
        }
        let (values, everyone_restrained) = apply_update(&norm, &model.bias, current.as_slice())?;
        if !everyone_restrained {
            restraint_violation_steps.push(t);
        }
        let next = OpinionState::new(values)?;
        eta.push(disagreement_norm(&next));
        states.push(next);
    }

    let consensus_value = converged_at.map(|_| states.last().expect("states never empty").mean());
    Ok(SimulationTrace {
        states,
        eta,
        converged_at,
        consensus_value,
        hypothesis: HypothesisNotes {
            strongly_connected: model.graph.is_strongly_connected(),
            isolated_agents: norm.isolated_agents(),
            restraint_violation_steps,
        },
    })
}

/// Checks whether a recorded run ended in consensus at tolerance `tol`:
/// if the final state's maximum deviation from its mean is below `tol`,
/// returns that mean as the agreed value.
///
/// This re-examines the trace as recorded, independently of the tolerance
/// the simulation ran with, so a looser `tol` can accept a run that stopped
/// on horizon exhaustion.
pub fn detect_consensus(trace: &SimulationTrace, tol: f64) -> Option<f64> {
    let last = trace.final_state();
    if last.max_deviation_from_mean() < tol {
        Some(last.mean())
    } else {
        None
    }
}

fn check_dim(graph: &InfluenceGraph, x: &OpinionState) -> Result<(), DynamicsError> {
    if x.len() != graph.agent_count() {
        return Err(DynamicsError::DimensionMismatch { expected: graph.agent_count(), got: x.len() });
    }
    Ok(())
}

/// Shared core of the sum-form update. Returns the next values and whether
/// every agent with non-self in-neighbors weighted at least one of them
/// strictly below 1 at this state.
fn apply_update(
    norm: &NormalizedInfluence,
    bias: &BiasSpec,
    xs: &[f64],
) -> Result<(Vec<f64>, bool), DynamicsError> {
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    let mut everyone_restrained = true;
    for i in 0..n {
        let mut v = xs[i];
        let mut has_non_self = false;
        let mut restrained = false;
        for &(j, w) in norm.row0(i) {
            if j == i {
                continue; // self-influence passes through unmodulated
            }
            let a = bias.eval(xs, i + 1, j + 1)?;
            has_non_self = true;
            restrained |= a < 1.0;
            v += w * a * (xs[j] - xs[i]);
        }
        if has_non_self && !restrained {
            everyone_restrained = false;
        }
        // The true update is a convex combination of entries in [0, 1];
        // clamp away rounding dust so states stay in range bit-exactly.
        out.push(v.clamp(0.0, 1.0));
    }
    Ok((out, everyone_restrained))
}
