//! Shared helpers for the integration suites: a deterministic random corpus
//! of opinion models, an eigenvalue oracle that is independent of the library
//! implementation, and small brute-force reference algorithms.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use opinion_core::bias::{BiasSpec, DisagreementBias, GroupPartition};
use opinion_core::dynamics::{OpinionModel, OpinionState};
use opinion_core::graph::InfluenceGraph;
use opinion_core::matrix::SquareMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// One generated model plus a handful of probe states in its state space.
pub struct CorpusEntry {
    pub index: usize,
    pub flavor: &'static str,
    pub model: OpinionModel,
    pub probe_states: Vec<OpinionState>,
}

pub const CORPUS_SEED: u64 = 0x0b1a5;
pub const CORPUS_SIZE: usize = 500;
pub const PROBES_PER_MODEL: usize = 10;

/// Deterministic corpus of random strongly connected models cycling through
/// every bias flavor the library catalogues.
pub fn build_corpus() -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|index| corpus_entry(index, &mut rng)).collect()
}

fn corpus_entry(index: usize, rng: &mut ChaCha8Rng) -> CorpusEntry {
    let n = rng.gen_range(2..=8usize);
    let graph = random_strongly_connected_graph(n, rng);
    let (flavor, bias) = bias_flavor(index, rng);
    let initial = random_state(n, rng);
    let model = OpinionModel::new(graph, bias, initial)
        .expect("generated models are dimensionally consistent and validate structurally");
    let probe_states = (0..PROBES_PER_MODEL).map(|_| random_state(n, rng)).collect();
    CorpusEntry { index, flavor, model, probe_states }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> OpinionState {
    OpinionState::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect())
        .expect("sampled coordinates lie in [0,1]")
}

fn random_weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.05..1.0)
}

/// A shuffled directed cycle (guaranteeing strong connectivity) plus up to 2n
/// extra random edges; ~40% of graphs also get a sprinkling of self-loops.
pub fn random_strongly_connected_graph(n: usize, rng: &mut ChaCha8Rng) -> InfluenceGraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for k in 0..n {
        edges.insert((order[k], order[(k + 1) % n]), random_weight(rng));
    }
    let extras = rng.gen_range(0..=2 * n);
    for _ in 0..extras {
        let src = rng.gen_range(1..=n);
        let dst = rng.gen_range(1..=n);
        if src != dst {
            edges.entry((src, dst)).or_insert_with(|| random_weight(rng));
        }
    }
    if rng.gen_bool(0.4) {
        for i in 1..=n {
            if rng.gen_bool(0.5) {
                edges.insert((i, i), random_weight(rng));
            }
        }
    }
    let list: Vec<(usize, usize, f64)> = edges.into_iter().map(|((s, d), w)| (s, d, w)).collect();
    InfluenceGraph::new(n, &list).expect("generated edges are in range and deduplicated")
}

fn bias_flavor(index: usize, rng: &mut ChaCha8Rng) -> (&'static str, BiasSpec) {
    match index % 8 {
        0 => ("constant", BiasSpec::constant(rng.gen_range(0.05..0.95)).unwrap()),
        1 => ("plain-averaging", BiasSpec::degroot()),
        2 => (
            "linear-response",
            BiasSpec::from_disagreement(DisagreementBias::Linear {
                gain: rng.gen_range(0.05..0.95),
            })
            .unwrap(),
        ),
        3 => (
            "damped-response",
            BiasSpec::from_disagreement(DisagreementBias::Damped {
                rate: rng.gen_range(0.05..0.95),
            })
            .unwrap(),
        ),
        4 => (
            "saturating-response",
            BiasSpec::from_disagreement(DisagreementBias::Tanh { gain: rng.gen_range(0.2..5.0) })
                .unwrap(),
        ),
        5 => ("intergroup", BiasSpec::intergroup(GroupPartition::default()).unwrap()),
        6 => ("state-coupled", BiasSpec::counterexample()),
        _ => (
            "product",
            BiasSpec::product(vec![
                BiasSpec::constant(rng.gen_range(0.3..0.95)).unwrap(),
                BiasSpec::from_disagreement(DisagreementBias::Linear {
                    gain: rng.gen_range(0.05..0.95),
                })
                .unwrap(),
            ]),
        ),
    }
}

/// Random row-stochastic matrices that are primitive by construction:
/// either strictly positive, or an aperiodic sparse cycle-with-chords shape.
pub fn random_primitive_stochastic(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let mut rows = vec![vec![0.0f64; n]; n];
    if rng.gen_bool(0.5) {
        for row in rows.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(0.0..1.0) + 0.02;
            }
        }
    } else {
        // a full cycle plus positive diagonal is irreducible and aperiodic
        for i in 0..n {
            rows[i][(i + 1) % n] = rng.gen_range(0.1..1.0);
            rows[i][i] = rng.gen_range(0.1..1.0);
            // occasional chord
            if rng.gen_bool(0.4) {
                let j = rng.gen_range(0..n);
                rows[i][j] += rng.gen_range(0.05..0.5);
            }
        }
    }
    for row in rows.iter_mut() {
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    SquareMatrix::from_rows(&rows).expect("rows are square and finite")
}

// ---------------------------------------------------------------------------
// Independent eigenvalue oracle
// ---------------------------------------------------------------------------
//
// Deliberately a different algorithm family from the library's estimator:
// the characteristic polynomial is built with the Faddeev–LeVerrier
// recurrence on the full matrix, and its roots are found with a separately
// written simultaneous-iteration solver.

fn mat_mul_dense(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn trace_dense(a: &[Vec<f64>]) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Coefficients `c` of det(λI − A) = Σ_k c[k]·λ^k with c[n] = 1, computed by
/// the Faddeev–LeVerrier recurrence M_k = A·M_{k−1} + c_{n−k+1}·I,
/// c_{n−k} = −tr(A·M_k)/k.
pub fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![0.0f64; n + 1];
    coeffs[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = mat_mul_dense(a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        let am = mat_mul_dense(a, &next);
        coeffs[n - k] = -trace_dense(&am) / k as f64;
        mk = next;
    }
    coeffs
}

/// All roots of a real monic polynomial (coefficients `c[k]` of Σ c[k]·λ^k)
/// by simultaneous Weierstrass iteration from a spread of complex seeds.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    // radius bound: 1 + max |c_k| keeps all roots inside the seed circle
    let bound = 1.0 + monic.iter().take(deg).fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64;
            Complex64::from_polar(bound * 0.7, angle)
        })
        .collect();
    for _ in 0..300 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // nudge coincident iterates apart and continue
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved <= 1e-14 {
            break;
        }
    }
    roots
}

/// Second-largest eigenvalue modulus of a stochastic matrix, by removing the
/// root closest to 1 from the characteristic polynomial's root set.
pub fn oracle_second_modulus(a: &[Vec<f64>]) -> f64 {
    let mut roots = polynomial_roots(&characteristic_polynomial(a));
    assert!(!roots.is_empty(), "oracle needs a non-trivial matrix");
    let dominant = roots
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| {
            let dx = (*x - Complex64::new(1.0, 0.0)).norm();
            let dy = (*y - Complex64::new(1.0, 0.0)).norm();
            dx.total_cmp(&dy)
        })
        .map(|(i, _)| i)
        .expect("non-empty root set");
    roots.swap_remove(dominant);
    roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn dense_rows(m: &SquareMatrix) -> Vec<Vec<f64>> {
    m.rows().map(|r| r.to_vec()).collect()
}

// ---------------------------------------------------------------------------
// Brute-force reference algorithms
// ---------------------------------------------------------------------------

/// All-pairs reachability by repeated BFS over an adjacency list; the slow
/// but obviously correct strong-connectivity check.
pub fn brute_force_strongly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(s, d) in edges {
        adj[s - 1].push(d - 1);
    }
    (0..n).all(|start| {
        let mut seen = vec![false; n];
        let mut queue = vec![start];
        seen[start] = true;
        while let Some(v) = queue.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    })
}
