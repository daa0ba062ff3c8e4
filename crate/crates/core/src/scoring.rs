//! Propagator score.
//!
//! `score(v)` sums, over the edges `(u, w)` of the subgraph induced by the
//! θ-coverage of `v`, the number of common neighbours of `u` and `w` in the
//! whole graph. A low score means few redundant paths around `v`, so fewer
//! vertices are reached twice by a cascade started there.

use std::sync::OnceLock;

use crate::community::count_common;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreConfig {
    pub theta: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig { theta: 2 }
    }
}

pub fn propagator_score(g: &Graph, v: NodeId, cfg: ScoreConfig) -> Result<u64> {
    let cover = g.coverage(v, cfg.theta)?;
    let mut score = 0u64;
    for u in &cover {
        for &w in g.adj(u) {
            if w > u && cover.contains(w) {
                score += count_common(g.adj(u), g.adj(w)) as u64;
            }
        }
    }
    Ok(score)
}

/// Vertex of minimal score among `candidates`; ties go to the smallest id.
pub fn min_score_node(g: &Graph, candidates: &NodeSet, cfg: ScoreConfig) -> Result<NodeId> {
    PropagatorScores::new(g, cfg).min_over(candidates.iter())
}

/// Lazily filled per-vertex score cache for one graph and radius.
#[derive(Debug)]
pub struct PropagatorScores<'g> {
    graph: &'g Graph,
    cfg: ScoreConfig,
    cache: Vec<OnceLock<u64>>,
}

impl<'g> PropagatorScores<'g> {
    pub fn new(graph: &'g Graph, cfg: ScoreConfig) -> Self {
        PropagatorScores {
            graph,
            cfg,
            cache: (0..graph.node_count()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn score(&self, v: NodeId) -> Result<u64> {
        let slot = self.cache.get(v).ok_or(Error::VertexOutOfRange {
            vertex: v,
            n: self.graph.node_count(),
        })?;
        if let Some(&s) = slot.get() {
            return Ok(s);
        }
        let s = propagator_score(self.graph, v, self.cfg)?;
        Ok(*slot.get_or_init(|| s))
    }

    pub fn min_over<I: IntoIterator<Item = NodeId>>(&self, candidates: I) -> Result<NodeId> {
        let mut best: Option<(u64, NodeId)> = None;
        for v in candidates {
            let key = (self.score(v)?, v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.map(|(_, v)| v)
            .ok_or_else(|| Error::domain("no candidates to score"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    const THETA2: ScoreConfig = ScoreConfig { theta: 2 };

    /// Independent hand-rolled evaluation: pairs of coverage members that are
    /// adjacent, counting common neighbours by scanning all vertices.
    fn oracle(g: &Graph, v: NodeId, theta: usize) -> u64 {
        let cover = g.coverage(v, theta).unwrap();
        let members: Vec<NodeId> = cover.iter().collect();
        let mut s = 0;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if g.has_edge(a, b) {
                    s += (0..g.node_count())
                        .filter(|&x| g.has_edge(a, x) && g.has_edge(b, x))
                        .count() as u64;
                }
            }
        }
        s
    }

    #[test]
    fn example_graph_scores() {
        let g = example_graph();
        let v = g.id_of("v").unwrap();
        let c = g.id_of("c").unwrap();
        assert_eq!(oracle(&g, v, 2), 1);
        assert_eq!(oracle(&g, c, 2), 6);
        assert_eq!(propagator_score(&g, v, THETA2).unwrap(), 1);
        assert_eq!(propagator_score(&g, c, THETA2).unwrap(), 6);
        let both: NodeSet = [v, c].into_iter().collect();
        assert_eq!(min_score_node(&g, &both, THETA2).unwrap(), v);
    }

    #[test]
    fn theta_zero_is_zero() {
        let g = example_graph();
        for v in 0..g.node_count() {
            assert_eq!(
                propagator_score(&g, v, ScoreConfig { theta: 0 }).unwrap(),
                0
            );
        }
    }

    #[test]
    fn all_vertices_match_oracle() {
        let g = example_graph();
        for theta in 0..4 {
            for v in 0..g.node_count() {
                assert_eq!(
                    propagator_score(&g, v, ScoreConfig { theta }).unwrap(),
                    oracle(&g, v, theta)
                );
            }
        }
    }

    #[test]
    fn min_score_ties_and_errors() {
        let g = triangle();
        let all: NodeSet = (0..3).collect();
        assert_eq!(min_score_node(&g, &all, THETA2).unwrap(), 0);
        let one: NodeSet = [2].into_iter().collect();
        assert_eq!(min_score_node(&g, &one, THETA2).unwrap(), 2);
        assert!(min_score_node(&g, &NodeSet::new(), THETA2).is_err());
        assert!(propagator_score(&g, 7, THETA2).is_err());
    }

    #[test]
    fn cache_agrees_with_direct() {
        let g = example_graph();
        let cache = PropagatorScores::new(&g, THETA2);
        for v in 0..g.node_count() {
            assert_eq!(
                cache.score(v).unwrap(),
                propagator_score(&g, v, THETA2).unwrap()
            );
            assert_eq!(
                cache.score(v).unwrap(),
                propagator_score(&g, v, THETA2).unwrap()
            );
        }
    }
}
