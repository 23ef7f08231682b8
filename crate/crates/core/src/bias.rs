//! Bias factors: state-dependent weighting of how much an agent discounts a
//! neighbor's disagreement.
//!
//! A bias factor assigns every ordered agent pair `(i, j)` and opinion
//! profile `x ∈ [0,1]^n` a value `α_{i,j}(x) ∈ [0, 1]`: the fraction of the
//! raw disagreement `x_j − x_i` that agent `i` actually absorbs from `j`.
//! Factor 1 everywhere recovers plain weighted averaging; smaller values slow
//! an agent down, and state dependence lets the *same* disagreement be
//! weighted differently depending on where the agents stand.
//!
//! Three semantic conditions make a factor well-behaved for consensus
//! analysis, and [`validate_bias_conditions`] probes them by sampling:
//! continuity in the state, strict positivity whenever the two opinions
//! differ, and — per agent — at least one in-neighbor weighted strictly
//! below 1 (somebody is actually listened to with restraint).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AgentId, InfluenceGraph};

#[derive(Debug, Error, PartialEq)]
pub enum BiasError {
    #[error("bias factors are defined for distinct agents, got i == j == {agent}")]
    SelfEdge { agent: usize },
    #[error("agent index {index} out of range 1..={n}")]
    AgentOutOfRange { index: usize, n: usize },
    #[error("the positional witness factor reads the first two coordinates and needs at least 2 agents, got {n}")]
    NeedsTwoAgents { n: usize },
    #[error("constant factor {value} outside (0, 1]")]
    ConstantOutOfRange { value: f64 },
    #[error("partition cuts ({cut_low}, {cut_high}) invalid, need 0 < cut_low < cut_high < 1")]
    PartitionInvalid { cut_low: f64, cut_high: f64 },
    #[error("disagreement response parameter {name} = {value} outside its admissible range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("disagreement response leaves the sign-preserving shrinking region at d = {d}: beta(d) = {beta}")]
    RegionViolation { d: f64, beta: f64 },
    #[error("sampling plan has no states to check (zero random states and no anchors)")]
    EmptySamplingPlan,
    #[error("anchor state has {got} entries, expected {expected}")]
    AnchorDimensionMismatch { expected: usize, got: usize },
    #[error("anchor state entry {value} outside [0, 1]")]
    AnchorOutOfRange { value: f64 },
}

// ---------------------------------------------------------------------------
// Group partition and the intergroup assessment surface
// ---------------------------------------------------------------------------

/// Splits the opinion interval `[0, 1]` into three camps: below `cut_low`,
/// the moderate band `[cut_low, cut_high]` (inclusive on both ends), and
/// above `cut_high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupPartition {
    pub cut_low: f64,
    pub cut_high: f64,
}

impl Default for GroupPartition {
    fn default() -> Self {
        Self { cut_low: 0.45, cut_high: 0.55 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Camp {
    Low,
    Mid,
    High,
}

impl GroupPartition {
    pub fn validate(&self) -> Result<(), BiasError> {
        let ok = self.cut_low.is_finite()
            && self.cut_high.is_finite()
            && 0.0 < self.cut_low
            && self.cut_low < self.cut_high
            && self.cut_high < 1.0;
        if ok {
            Ok(())
        } else {
            Err(BiasError::PartitionInvalid { cut_low: self.cut_low, cut_high: self.cut_high })
        }
    }

    fn camp(&self, v: f64) -> Camp {
        if v < self.cut_low {
            Camp::Low
        } else if v <= self.cut_high {
            Camp::Mid
        } else {
            Camp::High
        }
    }

    /// Width of the moderate band.
    fn band(&self) -> f64 {
        self.cut_high - self.cut_low
    }

    /// How far a low-camp agent trusts a moderate at `y`: ramps linearly from
    /// 1 at `cut_low` down to 0.5 at `cut_high`.
    pub fn phi(&self, y: f64) -> f64 {
        1.0 - 0.5 * (y - self.cut_low) / self.band()
    }

    /// How far a high-camp agent trusts a moderate at `x`: ramps linearly
    /// from 0.5 at `cut_low` up to 1 at `cut_high`.
    pub fn psi(&self, x: f64) -> f64 {
        0.5 + 0.5 * (x - self.cut_low) / self.band()
    }

    /// Bilinear bridge used between two moderates; interpolates so that
    /// `kappa(cut_low, y) == phi(y)` and `kappa(cut_high, y) == psi(y)`,
    /// keeping the assessment continuous across the band boundaries.
    pub fn kappa(&self, x: f64, y: f64) -> f64 {
        (self.phi(y) * (self.cut_high - x) + self.psi(y) * (x - self.cut_low)) / self.band()
    }

    /// Assessment `a(x, y)`: how much an agent holding opinion `x` counts a
    /// neighbor holding opinion `y`. Full weight inside one's own camp, flat
    /// 0.5 across the extremes, and the linear/bilinear ramps toward the
    /// moderate band.
    pub fn assessment(&self, x: f64, y: f64) -> f64 {
        match (self.camp(x), self.camp(y)) {
            (Camp::Low, Camp::Low) | (Camp::High, Camp::High) => 1.0,
            (Camp::Low, Camp::High) | (Camp::High, Camp::Low) => 0.5,
            (Camp::Low, Camp::Mid) => self.phi(y),
            (Camp::High, Camp::Mid) => self.psi(y),
            (Camp::Mid, Camp::Low) => self.phi(x),
            (Camp::Mid, Camp::High) => self.psi(x),
            (Camp::Mid, Camp::Mid) => self.kappa(x, y),
        }
    }
}

// ---------------------------------------------------------------------------
// Disagreement responses
// ---------------------------------------------------------------------------

/// A scalar response `beta: [-1, 1] -> [-1, 1]` applied directly to the
/// disagreement `d = x_j − x_i`. Admissible responses fix 0, keep the sign of
/// `d`, and strictly shrink it (`0 < beta(d)·sign(d) < |d|` for `d ≠ 0`);
/// that region is what makes the induced dynamics a weighted averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisagreementBias {
    /// `beta(d) = gain·d` with `gain ∈ (0, 1)`.
    Linear { gain: f64 },
    /// `beta(d) = d·(1 − rate·|d|)` with `rate ∈ (0, 1)`: full responsiveness
    /// to small disagreements, damped response to large ones.
    Damped { rate: f64 },
    /// `beta(d) = tanh(gain·d)/gain` with `gain > 0`: smooth saturation.
    Tanh { gain: f64 },
}

impl DisagreementBias {
    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            DisagreementBias::Linear { gain } => gain * d,
            DisagreementBias::Damped { rate } => d * (1.0 - rate * d.abs()),
            DisagreementBias::Tanh { gain } => (gain * d).tanh() / gain,
        }
    }

    /// Checks the parameter range, then probes a fine grid of disagreements
    /// for sign preservation and strict shrinking.
    pub fn validate(&self) -> Result<(), BiasError> {
        match *self {
            DisagreementBias::Linear { gain } => {
                if !(gain.is_finite() && 0.0 < gain && gain < 1.0) {
                    return Err(BiasError::ParamOutOfRange { name: "gain", value: gain });
                }
            }
            DisagreementBias::Damped { rate } => {
                if !(rate.is_finite() && 0.0 < rate && rate < 1.0) {
                    return Err(BiasError::ParamOutOfRange { name: "rate", value: rate });
                }
            }
            DisagreementBias::Tanh { gain } => {
                if !(gain.is_finite() && gain > 0.0) {
                    return Err(BiasError::ParamOutOfRange { name: "gain", value: gain });
                }
            }
        }
        const PROBES: usize = 2001;
        for k in 0..PROBES {
            let d = -1.0 + 2.0 * (k as f64) / ((PROBES - 1) as f64);
            let b = self.eval(d);
            let ok = if d == 0.0 {
                b == 0.0
            } else {
                b * d > 0.0 && b.abs() < d.abs()
            };
            if !ok {
                return Err(BiasError::RegionViolation { d, beta: b });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bias factor specifications
// ---------------------------------------------------------------------------

/// The factor family, before per-edge overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasKind {
    /// The same factor on every edge, in `(0, 1]`.
    Constant { value: f64 },
    /// Plain weighted averaging: factor 1 everywhere.
    Degroot,
    /// Factor induced by a disagreement response: `beta(d)/d` for `d ≠ 0`,
    /// and 0 on equal opinions. Feeding this through the generalized update
    /// reproduces the direct response dynamics term by term.
    Disagreement { beta: DisagreementBias },
    /// Camp-based assessment of the neighbor's opinion.
    Intergroup {
        #[serde(default)]
        partition: GroupPartition,
    },
    /// Positional witness factor `2(x₁ − x₁² + ¼)(1 − 0.9|x₁ − x₂|)`, read
    /// off the state's first two coordinates for every edge. It shows that a
    /// factor may weight equal disagreements differently depending on where
    /// the agents stand, so it cannot be rewritten as any function of the
    /// disagreement alone.
    Counterexample,
    /// Pointwise product of sub-factors.
    Product { factors: Vec<BiasSpec> },
}

/// A per-edge exception: the pair `(agent, neighbor)` is evaluated under
/// `spec` instead of the base kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeOverride {
    pub agent: AgentId,
    pub neighbor: AgentId,
    pub spec: BiasSpec,
}

/// A complete bias factor: a base family plus optional per-edge overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    #[serde(flatten)]
    pub kind: BiasKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<EdgeOverride>,
}

impl From<BiasKind> for BiasSpec {
    fn from(kind: BiasKind) -> Self {
        Self { kind, overrides: Vec::new() }
    }
}

impl BiasSpec {
    /// Uniform factor `value ∈ (0, 1]` on every edge.
    pub fn constant(value: f64) -> Result<Self, BiasError> {
        if !(value.is_finite() && 0.0 < value && value <= 1.0) {
            return Err(BiasError::ConstantOutOfRange { value });
        }
        Ok(BiasKind::Constant { value }.into())
    }

    /// Plain weighted averaging (factor 1 on every edge).
    pub fn degroot() -> Self {
        BiasKind::Degroot.into()
    }

    /// Embeds a disagreement response as a bias factor, validating the
    /// response first. The induced factor is `beta(x_j − x_i)/(x_j − x_i)`
    /// off the equal-opinion diagonal and 0 on it.
    pub fn from_disagreement(beta: DisagreementBias) -> Result<Self, BiasError> {
        beta.validate()?;
        Ok(BiasKind::Disagreement { beta }.into())
    }

    /// Camp-based assessment with the given partition.
    pub fn intergroup(partition: GroupPartition) -> Result<Self, BiasError> {
        partition.validate()?;
        Ok(BiasKind::Intergroup { partition }.into())
    }

    /// The positional witness factor (see [`BiasKind::Counterexample`]).
    pub fn counterexample() -> Self {
        BiasKind::Counterexample.into()
    }

    /// Pointwise product of the given factors. An empty product is the
    /// neutral factor 1.
    pub fn product(factors: Vec<BiasSpec>) -> Self {
        BiasKind::Product { factors }.into()
    }

    /// Adds a per-edge exception.
    pub fn with_override(mut self, agent: AgentId, neighbor: AgentId, spec: BiasSpec) -> Self {
        self.overrides.push(EdgeOverride { agent, neighbor, spec });
        self
    }

    /// Structural validation of every parameter in the spec tree.
    pub fn validate(&self) -> Result<(), BiasError> {
        match &self.kind {
            BiasKind::Constant { value } => {
                if !(value.is_finite() && 0.0 < *value && *value <= 1.0) {
                    return Err(BiasError::ConstantOutOfRange { value: *value });
                }
            }
            BiasKind::Degroot | BiasKind::Counterexample => {}
            BiasKind::Disagreement { beta } => beta.validate()?,
            BiasKind::Intergroup { partition } => partition.validate()?,
            BiasKind::Product { factors } => {
                for f in factors {
                    f.validate()?;
                }
            }
        }
        for o in &self.overrides {
            if o.agent == o.neighbor {
                return Err(BiasError::SelfEdge { agent: o.agent });
            }
            o.spec.validate()?;
        }
        Ok(())
    }

    /// Evaluates the factor for the ordered pair `(agent, neighbor)` at
    /// state `x`. Indices are 1-based and must be distinct and in range.
    /// The result is always in `[0, 1]`.
    pub fn eval(&self, x: &[f64], agent: AgentId, neighbor: AgentId) -> Result<f64, BiasError> {
        let n = x.len();
        if agent == neighbor {
            return Err(BiasError::SelfEdge { agent });
        }
        for index in [agent, neighbor] {
            if index == 0 || index > n {
                return Err(BiasError::AgentOutOfRange { index, n });
            }
        }
        self.eval_unchecked(x, agent, neighbor)
    }

    /// Evaluation after index checks; recursion point for overrides and
    /// products.
    fn eval_unchecked(&self, x: &[f64], agent: AgentId, neighbor: AgentId) -> Result<f64, BiasError> {
        if let Some(o) = self.overrides.iter().find(|o| o.agent == agent && o.neighbor == neighbor) {
            return o.spec.eval_unchecked(x, agent, neighbor);
        }
        let v = match &self.kind {
            BiasKind::Constant { value } => *value,
            BiasKind::Degroot => 1.0,
            BiasKind::Disagreement { beta } => {
                let d = x[neighbor - 1] - x[agent - 1];
                if d == 0.0 {
                    0.0
                } else {
                    beta.eval(d) / d
                }
            }
            BiasKind::Intergroup { partition } => partition.assessment(x[agent - 1], x[neighbor - 1]),
            BiasKind::Counterexample => {
                if x.len() < 2 {
                    return Err(BiasError::NeedsTwoAgents { n: x.len() });
                }
                2.0 * (x[0] - x[0] * x[0] + 0.25) * (1.0 - 0.9 * (x[0] - x[1]).abs())
            }
            BiasKind::Product { factors } => {
                let mut p = 1.0;
                for f in factors {
                    p *= f.eval_unchecked(x, agent, neighbor)?;
                }
                p
            }
        };
        // Factors are in [0, 1] by construction; clamp away rounding dust.
        Ok(v.clamp(0.0, 1.0))
    }

    /// True when the spec that actually applies to `(agent, neighbor)`
    /// involves an embedded disagreement response. Such factors are 0 on the
    /// equal-opinion diagonal by convention and hence discontinuous there;
    /// the continuity probe exempts exact-equality states for them.
    fn embeds_disagreement(&self, agent: AgentId, neighbor: AgentId) -> bool {
        if let Some(o) = self.overrides.iter().find(|o| o.agent == agent && o.neighbor == neighbor) {
            return o.spec.embeds_disagreement(agent, neighbor);
        }
        match &self.kind {
            BiasKind::Disagreement { .. } => true,
            BiasKind::Product { factors } => factors.iter().any(|f| f.embeds_disagreement(agent, neighbor)),
            _ => false,
        }
    }

    /// True when the factor is identically 1 (plain averaging), which makes
    /// the "some neighbor weighted below 1" condition fail by construction.
    pub fn is_plain_averaging(&self) -> bool {
        self.overrides.is_empty()
            && match &self.kind {
                BiasKind::Degroot => true,
                BiasKind::Constant { value } => *value == 1.0,
                BiasKind::Product { factors } => factors.iter().all(|f| f.is_plain_averaging()),
                _ => false,
            }
    }
}

// ---------------------------------------------------------------------------
// Sampled condition checking
// ---------------------------------------------------------------------------

/// How [`validate_bias_conditions`] samples the state space.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    /// Number of uniformly sampled states in `[0,1]^n`.
    pub random_states: usize,
    /// Seed for the sampler; fixed so reports are reproducible.
    pub seed: u64,
    /// Perturbation radius for the continuity probe.
    pub epsilon: f64,
    /// Continuity budget: a jump larger than `modulus·epsilon` between
    /// states `epsilon` apart is flagged.
    pub modulus: f64,
    /// States that must be checked in addition to the random sample; the
    /// "some neighbor below 1" verdict is anchored on these.
    pub anchors: Vec<Vec<f64>>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self { random_states: 200, seed: 0x0b1a5, epsilon: 1e-6, modulus: 100.0, anchors: Vec::new() }
    }
}

impl SamplingPlan {
    pub fn with_anchor(mut self, anchor: Vec<f64>) -> Self {
        self.anchors.push(anchor);
        self
    }
}

/// Continuity probe outcome: largest factor jump seen across state pairs at
/// distance `epsilon`, versus the allowed budget.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityVerdict {
    pub passed: bool,
    pub max_jump: f64,
    pub budget: f64,
    pub pairs_checked: usize,
    /// Probe pairs skipped because the edge embeds a disagreement response
    /// and one state sat exactly on the equal-opinion diagonal.
    pub exempted_pairs: usize,
}

/// Positivity probe outcome: a factor must be strictly positive whenever the
/// two opinions differ.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityVerdict {
    pub passed: bool,
    pub violations: usize,
    /// First violation seen, as (state number, agent, neighbor).
    pub first_violation: Option<(usize, AgentId, AgentId)>,
}

/// Restraint probe outcome: per state, every agent with non-self in-neighbors
/// must weight at least one of them strictly below 1.
#[derive(Debug, Clone, Serialize)]
pub struct RestraintVerdict {
    /// Verdict at the anchor states (all random states if no anchors given).
    pub passed: bool,
    /// Failures at anchor states, as (anchor number, agent).
    pub anchor_failures: Vec<(usize, AgentId)>,
    /// How many random states had some agent fail the check.
    pub sampled_failures: usize,
    pub states_checked: usize,
}

/// Sampled verdicts for the three factor conditions.
///
/// Failures are sound (a concrete witness was found); passes are heuristic
/// (no witness in the sample), which `disclaimer` states verbatim.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub continuity: ContinuityVerdict,
    pub positivity: PositivityVerdict,
    pub restraint: RestraintVerdict,
    pub disclaimer: String,
}

impl ConditionReport {
    /// Overall verdict: continuity and positivity over the whole sample,
    /// restraint at the anchors (or the whole sample when no anchors).
    pub fn passed(&self) -> bool {
        self.continuity.passed && self.positivity.passed && self.restraint.passed
    }
}

/// Probes the three factor conditions on `graph` by sampling states.
///
/// Random states are drawn uniformly from `[0,1]^n` with the plan's seed;
/// anchor states are always included. Continuity compares factor values at
/// state pairs `epsilon` apart against the `modulus·epsilon` budget.
pub fn validate_bias_conditions(
    graph: &InfluenceGraph,
    spec: &BiasSpec,
    plan: &SamplingPlan,
) -> Result<ConditionReport, BiasError> {
    spec.validate()?;
    let n = graph.agent_count();
    if plan.random_states == 0 && plan.anchors.is_empty() {
        return Err(BiasError::EmptySamplingPlan);
    }
    for a in &plan.anchors {
        if a.len() != n {
            return Err(BiasError::AnchorDimensionMismatch { expected: n, got: a.len() });
        }
        if let Some(&bad) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(BiasError::AnchorOutOfRange { value: bad });
        }
    }

    // Directed evaluation pairs (agent, neighbor), neighbor a non-self in-neighbor.
    let mut pairs: Vec<(AgentId, AgentId)> = Vec::new();
    for i in 0..n {
        for &(j, _) in graph.in_edges0(i) {
            if j != i {
                pairs.push((i + 1, j + 1));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let budget = plan.modulus * plan.epsilon;
    let mut continuity = ContinuityVerdict {
        passed: true,
        max_jump: 0.0,
        budget,
        pairs_checked: 0,
        exempted_pairs: 0,
    };
    let mut positivity = PositivityVerdict { passed: true, violations: 0, first_violation: None };
    let mut restraint = RestraintVerdict {
        passed: true,
        anchor_failures: Vec::new(),
        sampled_failures: 0,
        states_checked: 0,
    };

    let mut check_state = |state: &[f64],
                           state_no: usize,
                           anchor_no: Option<usize>,
                           rng: Option<&mut ChaCha8Rng>|
     -> Result<(), BiasError> {
        restraint.states_checked += 1;
        // Continuity: compare against a nearby perturbed state (random states only).
        let perturbed = rng.map(|rng| {
            let p: Vec<f64> = state
                .iter()
                .map(|&v| (v + rng.gen_range(-plan.epsilon..=plan.epsilon)).clamp(0.0, 1.0))
                .collect();
            p
        });
        let mut state_restrained = vec![false; n + 1];
        let mut has_pair = vec![false; n + 1];
        for &(i, j) in &pairs {
            let a = spec.eval(state, i, j)?;
            has_pair[i] = true;
            if a < 1.0 {
                state_restrained[i] = true;
            }
            if state[i - 1] != state[j - 1] && a <= 0.0 {
                positivity.violations += 1;
                if positivity.first_violation.is_none() {
                    positivity.first_violation = Some((state_no, i, j));
                }
            }
            if let Some(p) = &perturbed {
                let exempt = spec.embeds_disagreement(i, j)
                    && (state[i - 1] == state[j - 1] || p[i - 1] == p[j - 1]);
                if exempt {
                    continuity.exempted_pairs += 1;
                } else {
                    let b = spec.eval(p, i, j)?;
                    continuity.pairs_checked += 1;
                    continuity.max_jump = continuity.max_jump.max((a - b).abs());
                }
            }
        }
        let failed_agents: Vec<AgentId> =
            (1..=n).filter(|&i| has_pair[i] && !state_restrained[i]).collect();
        if !failed_agents.is_empty() {
            match anchor_no {
                Some(k) => {
                    for agent in failed_agents {
                        restraint.anchor_failures.push((k, agent));
                    }
                }
                None => restraint.sampled_failures += 1,
            }
        }
        Ok(())
    };

    for s in 0..plan.random_states {
        let state: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        check_state(&state, s, None, Some(&mut rng))?;
    }
    for (k, anchor) in plan.anchors.iter().enumerate() {
        check_state(anchor, plan.random_states + k, Some(k), None)?;
    }

    continuity.passed = continuity.max_jump <= budget;
    positivity.passed = positivity.violations == 0;
    restraint.passed = if plan.anchors.is_empty() {
        restraint.sampled_failures == 0
    } else {
        restraint.anchor_failures.is_empty()
    };

    Ok(ConditionReport {
        continuity,
        positivity,
        restraint,
        disclaimer: "sampling-based: failures are sound, passes are heuristic".to_string(),
    })
}
