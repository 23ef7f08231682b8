//! Discrete dynamical-system utilities: orbits, long-run accumulation-point
//! estimation, and a small catalogue of iterated maps.
//!
//! The opinion update is itself a self-map of the state cube, so the same
//! machinery that iterates textbook maps (the logistic family, constant maps)
//! also drives opinion models — which is how cross-checks between plain orbit
//! iteration and the full simulation loop stay possible.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{step, DynamicsError, OpinionModel, OpinionState};

#[derive(Debug, Error)]
pub enum DynsysError {
    #[error("parameter {name} = {value} is outside its allowed range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("constant map needs a non-empty, finite target point")]
    InvalidConstantTarget,
    #[error("point has dimension {got}, map expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} = {value} is outside the map's domain [0, 1]")]
    PointOutOfDomain { index: usize, value: f64 },
    #[error("burn-in {burn_in} must be smaller than the orbit length {orbit_len}")]
    BurnInTooLong { burn_in: usize, orbit_len: usize },
    #[error("cluster tolerance must be positive, got {value}")]
    ClusterTolNotPositive { value: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

// ---------------------------------------------------------------------------
// Map catalogue
// ---------------------------------------------------------------------------

/// A self-map of (a product of copies of) the unit interval, iterated to
/// produce orbits.
#[derive(Debug, Clone)]
pub enum IteratedMap {
    /// `f(x) = μ·x·(1−x)` on `[0,1]`; requires `μ ∈ [0,4]` so the interval
    /// stays invariant.
    Logistic { mu: f64 },
    /// Sends every point to one fixed target.
    Constant { target: Vec<f64> },
    /// One synchronous opinion update of the wrapped model (the model's
    /// starting state is the conventional orbit seed but any state works).
    Opinion(Box<OpinionModel>),
}

/// Builds the logistic-family map `f(x) = μ·x·(1−x)`, rejecting `μ` outside
/// `[0,4]` (outside it the unit interval is not invariant).
pub fn logistic_map(mu: f64) -> Result<IteratedMap, DynsysError> {
    if !mu.is_finite() || !(0.0..=4.0).contains(&mu) {
        return Err(DynsysError::ParamOutOfRange { name: "mu", value: mu });
    }
    Ok(IteratedMap::Logistic { mu })
}

impl IteratedMap {
    pub fn constant(target: Vec<f64>) -> Result<Self, DynsysError> {
        if target.is_empty() || target.iter().any(|v| !v.is_finite()) {
            return Err(DynsysError::InvalidConstantTarget);
        }
        Ok(Self::Constant { target })
    }

    pub fn opinion(model: OpinionModel) -> Self {
        Self::Opinion(Box::new(model))
    }

    /// Dimension of the points the map acts on.
    pub fn dimension(&self) -> usize {
        match self {
            Self::Logistic { .. } => 1,
            Self::Constant { target } => target.len(),
            Self::Opinion(model) => model.agent_count(),
        }
    }

    /// Short human-readable identifier, recorded on orbits.
    pub fn describe(&self) -> String {
        match self {
            Self::Logistic { mu } => format!("logistic(mu={mu})"),
            Self::Constant { target } => format!("constant(dim={})", target.len()),
            Self::Opinion(model) => format!("opinion(agents={})", model.agent_count()),
        }
    }

    /// Checks that a point lies in the map's domain without applying it.
    pub fn check_domain(&self, x: &[f64]) -> Result<(), DynsysError> {
        let expected = self.dimension();
        if x.len() != expected {
            return Err(DynsysError::DimensionMismatch { expected, got: x.len() });
        }
        let in_unit_cube = matches!(self, Self::Logistic { .. } | Self::Opinion(_));
        for (index, &value) in x.iter().enumerate() {
            if !value.is_finite() || (in_unit_cube && !(0.0..=1.0).contains(&value)) {
                return Err(DynsysError::PointOutOfDomain { index, value });
            }
        }
        Ok(())
    }

    /// Applies the map once, checking the point against the map's domain.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, DynsysError> {
        self.check_domain(x)?;
        match self {
            Self::Logistic { mu } => Ok(vec![mu * x[0] * (1.0 - x[0])]),
            Self::Constant { target } => Ok(target.clone()),
            Self::Opinion(model) => {
                let state = OpinionState::new(x.to_vec())?;
                let next = step(&model.graph, &model.bias, &state)?;
                Ok(next.as_slice().to_vec())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

/// A finite forward orbit: `points[t+1]` is exactly the map applied to
/// `points[t]`, with `points[0]` the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Orbit {
    pub map_id: String,
    pub points: Vec<Vec<f64>>,
}

impl Orbit {
    /// Number of recorded points (steps + 1).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `t,value` rows (or `t,x_1,...,x_d` for vector-valued orbits),
    /// one per recorded point, floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.points.first().map_or(0, Vec::len);
        if dim == 1 {
            writeln!(w, "t,value")?;
        } else {
            let header: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
            writeln!(w, "t,{}", header.join(","))?;
        }
        for (t, point) in self.points.iter().enumerate() {
            let cells: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{t},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Iterates `map` for `steps` applications starting from `x0`, recording
/// every point. The composition law holds by construction: running `s` steps
/// and then `t` more from the endpoint reproduces the `s+t`-step orbit
/// bit-for-bit.
pub fn iterate_orbit(map: &IteratedMap, x0: &[f64], steps: usize) -> Result<Orbit, DynsysError> {
    map.check_domain(x0)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(x0.to_vec());
    for _ in 0..steps {
        let next = map.apply(points.last().expect("orbit is never empty"))?;
        points.push(next);
    }
    Ok(Orbit { map_id: map.describe(), points })
}

// ---------------------------------------------------------------------------
// Long-run behavior
// ---------------------------------------------------------------------------

/// Finite-horizon stand-in for the set of accumulation points of an orbit:
/// the tail (after `burn_in`) is clustered with radius `cluster_tol` in the
/// max-coordinate metric, and each cluster is summarized by the average of
/// its members.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaLimitEstimate {
    /// Cluster representatives, sorted lexicographically by coordinates.
    pub accumulation_points: Vec<Vec<f64>>,
    /// Number of tail points within `cluster_tol` of each representative
    /// (aligned with `accumulation_points`).
    pub support: Vec<usize>,
    pub cluster_tol: f64,
    pub burn_in: usize,
}

impl OmegaLimitEstimate {
    /// Drops representatives supported by fewer than `k` tail points.
    pub fn with_min_support(self, k: usize) -> Self {
        let (accumulation_points, support) = self
            .accumulation_points
            .into_iter()
            .zip(self.support)
            .filter(|(_, s)| *s >= k)
            .unzip();
        Self { accumulation_points, support, ..self }
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Estimates the orbit's accumulation points by clustering its tail.
///
/// This is a finite-horizon heuristic: a true limit set is asymptotic, while
/// this looks at the recorded points after `burn_in` only. A good default is
/// `burn_in` = half the orbit and `cluster_tol = 1e-3`.
pub fn omega_limit_estimate(
    orbit: &Orbit,
    burn_in: usize,
    cluster_tol: f64,
) -> Result<OmegaLimitEstimate, DynsysError> {
    if !(cluster_tol > 0.0) {
        return Err(DynsysError::ClusterTolNotPositive { value: cluster_tol });
    }
    if burn_in >= orbit.points.len() {
        return Err(DynsysError::BurnInTooLong { burn_in, orbit_len: orbit.points.len() });
    }
    let tail = &orbit.points[burn_in..];

    // greedy clustering against running centroids
    let mut centroids: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for point in tail {
        match centroids
            .iter()
            .enumerate()
            .map(|(idx, c)| (idx, linf(c, point)))
            .filter(|(_, d)| *d <= cluster_tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            Some((idx, _)) => {
                counts[idx] += 1;
                let k = counts[idx] as f64;
                for (c, p) in centroids[idx].iter_mut().zip(point) {
                    *c += (p - *c) / k;
                }
            }
            None => {
                centroids.push(point.clone());
                counts.push(1);
            }
        }
    }

    // recount support against the settled centroids
    let support: Vec<usize> = centroids
        .iter()
        .map(|c| tail.iter().filter(|p| linf(c, p) <= cluster_tol).count())
        .collect();

    let mut order: Vec<usize> = (0..centroids.len()).collect();
    order.sort_by(|&a, &b| {
        centroids[a]
            .iter()
            .zip(&centroids[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(OmegaLimitEstimate {
        accumulation_points: order.iter().map(|&i| centroids[i].clone()).collect(),
        support: order.iter().map(|&i| support[i]).collect(),
        cluster_tol,
        burn_in,
    })
}

/// Tail behavior split by time parity: the average tail point over even
/// times and over odd times, plus each class's spread (max distance of a
/// member from the class average). For an orbit settling into a 2-cycle both
/// spreads collapse while the two averages land on the cycle's points.
#[derive(Debug, Clone, Serialize)]
pub struct ParitySplit {
    pub even_representative: Vec<f64>,
    pub odd_representative: Vec<f64>,
    pub even_spread: f64,
    pub odd_spread: f64,
    pub burn_in: usize,
}

/// Splits the orbit tail by the parity of the absolute time index.
pub fn parity_split(orbit: &Orbit, burn_in: usize) -> Result<ParitySplit, DynsysError> {
    if burn_in + 1 >= orbit.points.len() {
        // need at least one point of each parity in the tail
        return Err(DynsysError::BurnInTooLong { burn_in, orbit_len: orbit.points.len() });
    }
    let dim = orbit.points[0].len();
    let mut sums = [vec![0.0f64; dim], vec![0.0f64; dim]];
    let mut counts = [0usize; 2];
    for (t, point) in orbit.points.iter().enumerate().skip(burn_in) {
        let class = t % 2;
        counts[class] += 1;
        for (s, p) in sums[class].iter_mut().zip(point) {
            *s += p;
        }
    }
    let reps: Vec<Vec<f64>> = (0..2)
        .map(|class| sums[class].iter().map(|s| s / counts[class] as f64).collect())
        .collect();
    let spread = |class: usize| -> f64 {
        orbit
            .points
            .iter()
            .enumerate()
            .skip(burn_in)
            .filter(|(t, _)| t % 2 == class)
            .map(|(_, p)| linf(p, &reps[class]))
            .fold(0.0, f64::max)
    };
    Ok(ParitySplit {
        even_spread: spread(0),
        odd_spread: spread(1),
        even_representative: reps[0].clone(),
        odd_representative: reps[1].clone(),
        burn_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::BiasSpec;
    use crate::dynamics::{simulate, SimulationOptions};
    use crate::graph::InfluenceGraph;
    use approx::assert_abs_diff_eq;

    // the two points of the logistic 2-cycle at μ = 3.4, i.e. the non-fixed
    // roots of f(f(x)) = x, computed from the quadratic
    // μ²x² − μ(μ+1)x + (μ+1) = 0
    const CYCLE_LOW: f64 = 0.45196324762615297;
    const CYCLE_HIGH: f64 = 0.8421543994326706;

    #[test]
    fn logistic_map_values_match_hand_computation() {
        let map = logistic_map(3.4).unwrap();
        assert_abs_diff_eq!(map.apply(&[0.3]).unwrap()[0], 0.714, epsilon = 1e-15);
        assert_abs_diff_eq!(map.apply(&[0.5]).unwrap()[0], 0.85, epsilon = 1e-15);
        let zero = logistic_map(0.0).unwrap();
        assert_eq!(zero.apply(&[0.7]).unwrap()[0], 0.0);
        let four = logistic_map(4.0).unwrap();
        assert_eq!(four.apply(&[0.5]).unwrap()[0], 1.0);
    }

    #[test]
    fn logistic_parameter_is_range_checked() {
        assert!(matches!(logistic_map(4.2), Err(DynsysError::ParamOutOfRange { .. })));
        assert!(matches!(logistic_map(-0.1), Err(DynsysError::ParamOutOfRange { .. })));
        assert!(matches!(logistic_map(f64::NAN), Err(DynsysError::ParamOutOfRange { .. })));
    }

    #[test]
    fn zero_step_orbit_is_the_seed_alone() {
        let map = logistic_map(3.4).unwrap();
        let orbit = iterate_orbit(&map, &[0.3], 0).unwrap();
        assert_eq!(orbit.points, vec![vec![0.3]]);
    }

    #[test]
    fn orbit_respects_composition_of_step_counts() {
        let map = logistic_map(3.9).unwrap();
        let long = iterate_orbit(&map, &[0.123], 50).unwrap();
        let first = iterate_orbit(&map, &[0.123], 20).unwrap();
        let second = iterate_orbit(&map, first.points.last().unwrap(), 30).unwrap();
        let rejoined: Vec<Vec<f64>> = first
            .points
            .iter()
            .cloned()
            .chain(second.points.iter().skip(1).cloned())
            .collect();
        assert_eq!(long.points, rejoined); // bitwise equality
    }

    #[test]
    fn two_cycle_is_recovered_with_its_period_structure() {
        let map = logistic_map(3.4).unwrap();
        let orbit = iterate_orbit(&map, &[0.3], 2000).unwrap();
        let estimate = omega_limit_estimate(&orbit, 1000, 1e-3).unwrap();
        assert_eq!(estimate.accumulation_points.len(), 2);
        let low = estimate.accumulation_points[0][0];
        let high = estimate.accumulation_points[1][0];
        assert_abs_diff_eq!(low, CYCLE_LOW, epsilon = 1e-9);
        assert_abs_diff_eq!(high, CYCLE_HIGH, epsilon = 1e-9);
        // the two representatives map onto each other under f
        assert_abs_diff_eq!(map.apply(&[low]).unwrap()[0], high, epsilon = 1e-9);
        assert_abs_diff_eq!(map.apply(&[high]).unwrap()[0], low, epsilon = 1e-9);
        // both clusters soak up half the tail
        assert!(estimate.support.iter().all(|&s| s >= 400));
    }

    #[test]
    fn parity_classes_settle_on_opposite_cycle_points() {
        let map = logistic_map(3.4).unwrap();
        let orbit = iterate_orbit(&map, &[0.3], 2000).unwrap();
        let split = parity_split(&orbit, 1000).unwrap();
        assert_abs_diff_eq!(split.even_representative[0], CYCLE_LOW, epsilon = 1e-9);
        assert_abs_diff_eq!(split.odd_representative[0], CYCLE_HIGH, epsilon = 1e-9);
        assert!(split.even_spread < 1e-12);
        assert!(split.odd_spread < 1e-12);
    }

    #[test]
    fn constant_map_has_singleton_limit_set() {
        let map = IteratedMap::constant(vec![0.25, 0.75]).unwrap();
        let orbit = iterate_orbit(&map, &[0.9, 0.1], 40).unwrap();
        let estimate = omega_limit_estimate(&orbit, 20, 1e-3).unwrap();
        assert_eq!(estimate.accumulation_points, vec![vec![0.25, 0.75]]);
        assert_eq!(estimate.support, vec![21]);
    }

    #[test]
    fn opinion_map_orbit_matches_the_simulation_loop() {
        let graph = InfluenceGraph::new(2, &[(1, 2, 0.8), (2, 1, 0.8)]).unwrap();
        let initial = OpinionState::new(vec![0.1, 0.9]).unwrap();
        let model =
            OpinionModel::new(graph, BiasSpec::constant(0.5).unwrap(), initial).unwrap();
        let trace = simulate(&model, &SimulationOptions::default()).unwrap();
        let steps = trace.states.len() - 1;
        let map = IteratedMap::opinion(model.clone());
        let orbit = iterate_orbit(&map, model.initial.as_slice(), steps).unwrap();
        for (orbit_point, trace_state) in orbit.points.iter().zip(&trace.states) {
            assert_eq!(orbit_point.as_slice(), trace_state.as_slice());
        }
    }

    #[test]
    fn burn_in_must_leave_a_tail() {
        let map = logistic_map(2.0).unwrap();
        let orbit = iterate_orbit(&map, &[0.3], 10).unwrap();
        assert!(matches!(
            omega_limit_estimate(&orbit, 11, 1e-3),
            Err(DynsysError::BurnInTooLong { .. })
        ));
        assert!(matches!(
            omega_limit_estimate(&orbit, 5, 0.0),
            Err(DynsysError::ClusterTolNotPositive { .. })
        ));
    }

    #[test]
    fn domain_violations_are_reported() {
        let map = logistic_map(3.4).unwrap();
        assert!(matches!(
            map.apply(&[1.5]),
            Err(DynsysError::PointOutOfDomain { index: 0, .. })
        ));
        assert!(matches!(
            map.apply(&[0.3, 0.4]),
            Err(DynsysError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn min_support_filter_drops_transient_clusters() {
        // a constant map visits the seed once, then sits on the target forever,
        // so zero burn-in yields exactly one low-support cluster plus one heavy one
        let map = IteratedMap::constant(vec![0.8]).unwrap();
        let orbit = iterate_orbit(&map, &[0.2], 50).unwrap();
        let estimate = omega_limit_estimate(&orbit, 0, 1e-6).unwrap();
        assert_eq!(estimate.accumulation_points.len(), 2);
        let filtered = estimate.with_min_support(2);
        assert_eq!(filtered.accumulation_points.len(), 1);
        assert_abs_diff_eq!(filtered.accumulation_points[0][0], 0.8, epsilon = 1e-12);
        assert_eq!(filtered.support, vec![50]);
    }

    #[test]
    fn orbit_csv_is_plottable() {
        let map = logistic_map(3.4).unwrap();
        let orbit = iterate_orbit(&map, &[0.3], 2).unwrap();
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines[1], "0,0.3");
        assert_eq!(lines[2], "1,0.714");
        assert_eq!(lines.len(), 4);
    }
}
