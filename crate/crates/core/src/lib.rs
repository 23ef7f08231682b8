//! Opinion dynamics on weighted influence graphs with state-dependent bias.
//!
//! Agents hold opinions in `[0, 1]` and repeatedly average toward their
//! in-neighbors, with each neighbor's pull scaled by a *bias factor* that may
//! depend on the whole current opinion profile — plain averaging, constant
//! discounting, disagreement-driven damping, intergroup assessment between
//! opinion camps, and products or per-edge mixtures of these.
//!
//! The crate provides:
//! - [`graph`]: weighted directed influence graphs, normalization, strong
//!   connectivity;
//! - [`bias`]: the bias-factor catalogue, evaluation, and sampling-based
//!   validation of the conditions (continuity, positivity, restraint) under
//!   which the dynamics provably reach consensus;
//! - [`dynamics`]: the synchronous update rule in agent-sum and matrix form,
//!   simulation to consensus, disagreement-norm tracking, CSV traces;
//! - [`spectral`]: row-stochasticity, irreducibility, primitivity, and
//!   power-iteration estimates of spectral radius and second-eigenvalue
//!   modulus of update matrices;
//! - [`dynsys`]: generic orbit iteration, limit-set estimation, and the
//!   logistic-map worked example;
//! - [`presets`]: the bundled reference scenarios;
//! - [`matrix`]: the small dense row-major matrix these modules share.

pub mod bias;
pub mod dynamics;
pub mod dynsys;
pub mod graph;
pub mod matrix;
pub mod presets;
pub mod spectral;

pub use bias::{
    validate_bias_conditions, BiasError, BiasSpec, ConditionReport, DisagreementBias,
    GroupPartition, SamplingPlan,
};
pub use dynamics::{
    build_update_matrix, detect_consensus, disagreement_norm, simulate, step, DynamicsError,
    OpinionModel, OpinionState, SimulationOptions, SimulationTrace, UpdateMatrix,
};
pub use dynsys::{
    iterate_orbit, logistic_map, omega_limit_estimate, parity_split, DynsysError, IteratedMap,
    OmegaLimitEstimate, Orbit,
};
pub use graph::{AgentId, GraphError, InfluenceGraph, NormalizedInfluence};
pub use matrix::{MatrixError, SquareMatrix};
pub use spectral::{
    analyze_matrix, is_irreducible, is_primitive, is_row_stochastic, second_eigenvalue_modulus,
    spectral_radius_estimate, EigenEstimate, MatrixReport, PowerIterationOptions, SpectralError,
};
