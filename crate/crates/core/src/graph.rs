//! Directed weighted influence graphs.
//!
//! Agents are numbered `1..=n`. A directed edge `(src, dst, w)` states that
//! `src`'s opinion enters `dst`'s update with raw weight `w ∈ (0, 1]`. The
//! *in-neighborhood* of an agent collects every source that reaches it;
//! normalizing each in-neighborhood to total weight 1 yields the convex
//! averaging weights the dynamics operate on. Self-loops are allowed and
//! count toward normalization like any other edge.

use std::collections::BTreeSet;

use thiserror::Error;

/// 1-based agent index.
pub type AgentId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one agent")]
    NoAgents,
    #[error("agent index {index} out of range 1..={n}")]
    AgentOutOfRange { index: usize, n: usize },
    #[error("edge ({src} -> {dst}) has weight {weight}, expected a finite value in (0, 1]")]
    WeightOutOfRange { src: usize, dst: usize, weight: f64 },
    #[error("edge ({src} -> {dst}) listed more than once")]
    DuplicateEdge { src: usize, dst: usize },
}

/// Directed weighted graph of who influences whom.
#[derive(Debug, Clone)]
pub struct InfluenceGraph {
    n: usize,
    /// `in_edges[i]` lists `(source, weight)` pairs for agent `i`, 0-based
    /// internally, sorted by source for deterministic iteration.
    in_edges: Vec<Vec<(usize, f64)>>,
}

impl InfluenceGraph {
    /// Builds a graph on `n` agents from directed `(src, dst, weight)` edges.
    ///
    /// Indices are 1-based. Weights must be finite and in `(0, 1]`; a pair
    /// `(src, dst)` may appear at most once.
    pub fn new(n: usize, edges: &[(AgentId, AgentId, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoAgents);
        }
        let mut in_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(src, dst, w) in edges {
            for index in [src, dst] {
                if index == 0 || index > n {
                    return Err(GraphError::AgentOutOfRange { index, n });
                }
            }
            if !w.is_finite() || w <= 0.0 || w > 1.0 {
                return Err(GraphError::WeightOutOfRange { src, dst, weight: w });
            }
            let row = &mut in_edges[dst - 1];
            if row.iter().any(|&(s, _)| s == src - 1) {
                return Err(GraphError::DuplicateEdge { src, dst });
            }
            row.push((src - 1, w));
        }
        for row in &mut in_edges {
            row.sort_by_key(|&(s, _)| s);
        }
        Ok(Self { n, in_edges })
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.in_edges.iter().map(Vec::len).sum()
    }

    /// Raw weight of `src -> dst`, if that edge exists. 1-based indices.
    pub fn weight(&self, src: AgentId, dst: AgentId) -> Option<f64> {
        if src == 0 || src > self.n || dst == 0 || dst > self.n {
            return None;
        }
        self.in_edges[dst - 1]
            .iter()
            .find(|&&(s, _)| s == src - 1)
            .map(|&(_, w)| w)
    }

    /// Agents whose opinion enters `agent`'s update (1-based).
    pub fn in_neighbors(&self, agent: AgentId) -> Result<BTreeSet<AgentId>, GraphError> {
        if agent == 0 || agent > self.n {
            return Err(GraphError::AgentOutOfRange { index: agent, n: self.n });
        }
        Ok(self.in_edges[agent - 1].iter().map(|&(s, _)| s + 1).collect())
    }

    /// `(source, weight)` list for a 0-based agent index; crate-internal fast path.
    pub(crate) fn in_edges0(&self, i: usize) -> &[(usize, f64)] {
        &self.in_edges[i]
    }

    /// True when every agent can reach every other along directed edges.
    /// A single agent is trivially strongly connected.
    pub fn is_strongly_connected(&self) -> bool {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        let mut inn: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (dst, row) in self.in_edges.iter().enumerate() {
            for &(src, _) in row {
                if src != dst {
                    out[src].push(dst);
                    inn[dst].push(src);
                }
            }
        }
        reaches_all(&out) && reaches_all(&inn)
    }

    /// Row-normalizes each in-neighborhood so the incoming weights of every
    /// non-isolated agent sum to 1. Isolated agents (empty in-neighborhood)
    /// keep an empty row; the dynamics treat them as fixed.
    pub fn normalized(&self) -> NormalizedInfluence {
        let entries = self
            .in_edges
            .iter()
            .map(|row| {
                let total: f64 = row.iter().map(|&(_, w)| w).sum();
                row.iter().map(|&(s, w)| (s, w / total)).collect()
            })
            .collect();
        NormalizedInfluence { n: self.n, entries }
    }
}

/// Breadth-first check that node 0 reaches every node in `adj`.
/// Applied to the graph and its reverse this decides strong connectivity.
fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Influence weights after row normalization: for every agent with at least
/// one in-edge, incoming weights sum to exactly 1 (up to rounding).
#[derive(Debug, Clone)]
pub struct NormalizedInfluence {
    n: usize,
    entries: Vec<Vec<(usize, f64)>>,
}

impl NormalizedInfluence {
    pub fn agent_count(&self) -> usize {
        self.n
    }

    /// Normalized weight of `src -> dst`, if that edge exists. 1-based.
    pub fn weight(&self, src: AgentId, dst: AgentId) -> Option<f64> {
        if src == 0 || src > self.n || dst == 0 || dst > self.n {
            return None;
        }
        self.entries[dst - 1]
            .iter()
            .find(|&&(s, _)| s == src - 1)
            .map(|&(_, w)| w)
    }

    /// Agents with no in-edges at all (their opinions never move). 1-based.
    pub fn isolated_agents(&self) -> Vec<AgentId> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, row)| row.is_empty())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub(crate) fn row0(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Six agents, ten directed edges; the network used by the showcase demo.
    fn showcase_edges() -> Vec<(AgentId, AgentId, f64)> {
        vec![
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
        ]
    }

    #[test]
    fn construction_and_in_neighbors() {
        let g = InfluenceGraph::new(6, &showcase_edges()).unwrap();
        assert_eq!(g.agent_count(), 6);
        assert_eq!(g.edge_count(), 10);
        let a1: Vec<_> = g.in_neighbors(1).unwrap().into_iter().collect();
        assert_eq!(a1, vec![2, 6]);
        let a6: Vec<_> = g.in_neighbors(6).unwrap().into_iter().collect();
        assert_eq!(a6, vec![4, 5]);
    }

    #[test]
    fn in_neighbors_rejects_out_of_range() {
        let g = InfluenceGraph::new(3, &[(1, 2, 0.5)]).unwrap();
        assert_eq!(g.in_neighbors(0).unwrap_err(), GraphError::AgentOutOfRange { index: 0, n: 3 });
        assert_eq!(g.in_neighbors(4).unwrap_err(), GraphError::AgentOutOfRange { index: 4, n: 3 });
    }

    #[test]
    fn rejects_bad_weights_and_duplicates() {
        assert_eq!(
            InfluenceGraph::new(2, &[(1, 2, 0.0)]).unwrap_err(),
            GraphError::WeightOutOfRange { src: 1, dst: 2, weight: 0.0 }
        );
        assert_eq!(
            InfluenceGraph::new(2, &[(1, 2, 1.2)]).unwrap_err(),
            GraphError::WeightOutOfRange { src: 1, dst: 2, weight: 1.2 }
        );
        assert_eq!(
            InfluenceGraph::new(2, &[(1, 2, 0.5), (1, 2, 0.3)]).unwrap_err(),
            GraphError::DuplicateEdge { src: 1, dst: 2 }
        );
        assert_eq!(InfluenceGraph::new(0, &[]).unwrap_err(), GraphError::NoAgents);
    }

    #[test]
    fn normalization_divides_by_incoming_total() {
        let g = InfluenceGraph::new(6, &showcase_edges()).unwrap();
        let norm = g.normalized();
        // agent 1 hears agents 2 (0.6) and 6 (1.0): total 1.6
        assert!((norm.weight(2, 1).unwrap() - 0.375).abs() < 1e-15);
        assert!((norm.weight(6, 1).unwrap() - 0.625).abs() < 1e-15);
        // every non-isolated row sums to 1
        for agent in 1..=6 {
            let total: f64 = (1..=6).filter_map(|src| norm.weight(src, agent)).sum();
            assert!((total - 1.0).abs() < 1e-12, "agent {agent} row sums to {total}");
        }
        assert!(norm.isolated_agents().is_empty());
    }

    #[test]
    fn self_loops_count_toward_normalization() {
        let g = InfluenceGraph::new(2, &[(1, 1, 0.5), (2, 1, 0.5), (1, 2, 1.0)]).unwrap();
        let norm = g.normalized();
        assert!((norm.weight(1, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((norm.weight(2, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn isolated_agent_has_empty_row() {
        let g = InfluenceGraph::new(3, &[(1, 2, 0.5)]).unwrap();
        let norm = g.normalized();
        assert_eq!(norm.isolated_agents(), vec![1, 3]);
        assert!(g.in_neighbors(3).unwrap().is_empty());
    }

    #[test]
    fn strong_connectivity_detects_the_cut_edge() {
        let g = InfluenceGraph::new(6, &showcase_edges()).unwrap();
        assert!(g.is_strongly_connected());
        // dropping 6 -> 1 severs the only way back to agent 1
        let edges: Vec<_> = showcase_edges().into_iter().filter(|&(s, d, _)| (s, d) != (6, 1)).collect();
        let cut = InfluenceGraph::new(6, &edges).unwrap();
        assert!(!cut.is_strongly_connected());
    }

    #[test]
    fn single_agent_is_strongly_connected() {
        let g = InfluenceGraph::new(1, &[]).unwrap();
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn self_loops_do_not_fake_connectivity() {
        let g = InfluenceGraph::new(2, &[(1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        assert!(!g.is_strongly_connected());
    }
}
