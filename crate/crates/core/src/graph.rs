//! Immutable undirected simple graph.
//!
//! Vertices carry arbitrary string labels externally and dense ids `0..n`
//! internally, assigned in first-seen order by [`load_edge_list`]. Adjacency
//! is stored in compressed sparse rows with every neighbour list sorted, so
//! neighbourhood intersections are linear merges.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// A set of vertex ids, kept sorted and duplicate free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn from_sorted_unchecked(ids: Vec<NodeId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        NodeSet(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn insert(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn min(&self) -> Option<NodeId> {
        self.0.first().copied()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut ids: Vec<NodeId> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        NodeSet(ids)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, NodeId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Hop distance between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Hops(usize),
    Unreachable,
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

/// Counts of input lines silently dropped while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl Graph {
    /// Builds a graph from labels and an edge list over label indices.
    /// Self-loops and repeated edges are dropped.
    pub fn from_edges(labels: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::build(labels, edges).map(|(g, _)| g)
    }

    /// Convenience constructor for tests and synthetic graphs: vertex `i` is
    /// labelled with its decimal id.
    pub fn from_unlabeled(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    fn build(labels: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<(Self, LoadReport)> {
        let n = labels.len();
        let mut report = LoadReport::default();
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                report.self_loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            report.duplicate_edges += before - list.len();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        // each duplicate was counted from both endpoints
        report.duplicate_edges /= 2;

        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate vertex label {l:?}")));
            }
        }
        Ok((
            Graph {
                offsets,
                targets,
                labels,
                index,
            },
            report,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.node_count(),
            })
        }
    }

    /// Sorted neighbour slice. Panics if `u` is out of range.
    #[inline]
    pub fn adj(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn neighbors(&self, u: NodeId) -> Result<NodeSet> {
        self.check(u)?;
        Ok(NodeSet::from_sorted_unchecked(self.adj(u).to_vec()))
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.adj(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.adj(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Maximum and average full-graph degree over `x`.
    pub fn degree_stats(&self, x: &NodeSet) -> Result<(usize, f64)> {
        if x.is_empty() {
            return Err(Error::domain("degree_stats over an empty vertex set"));
        }
        let mut max = 0;
        let mut sum = 0usize;
        for v in x {
            self.check(v)?;
            let d = self.degree(v);
            max = max.max(d);
            sum += d;
        }
        Ok((max, sum as f64 / x.len() as f64))
    }

    /// Subgraph induced by `x`. Vertex `i` of the result is the `i`-th
    /// smallest member of `x`, so `x.as_slice()` maps back to ids of `self`.
    pub fn induced_subgraph(&self, x: &NodeSet) -> Result<Graph> {
        let mut local = HashMap::with_capacity(x.len());
        for (i, v) in x.iter().enumerate() {
            self.check(v)?;
            local.insert(v, i);
        }
        let mut offsets = Vec::with_capacity(x.len() + 1);
        let mut targets = Vec::new();
        let mut labels = Vec::with_capacity(x.len());
        let mut index = HashMap::with_capacity(x.len());
        offsets.push(0);
        for (i, v) in x.iter().enumerate() {
            // members of x are ascending, so local ids preserve neighbour order
            targets.extend(self.adj(v).iter().filter_map(|w| local.get(w).copied()));
            offsets.push(targets.len());
            labels.push(self.labels[v].clone());
            index.insert(self.labels[v].clone(), i);
        }
        Ok(Graph {
            offsets,
            targets,
            labels,
            index,
        })
    }

    pub fn distance(&self, u: NodeId, v: NodeId) -> Result<Distance> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(Distance::Hops(0));
        }
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[u] = 0;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            for &y in self.adj(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    if y == v {
                        return Ok(Distance::Hops(dist[y]));
                    }
                    queue.push_back(y);
                }
            }
        }
        Ok(Distance::Unreachable)
    }

    /// All vertices within `theta` hops of `u`, including `u`.
    pub fn coverage(&self, u: NodeId, theta: usize) -> Result<NodeSet> {
        self.check(u)?;
        let mut seen = HashMap::new();
        seen.insert(u, 0usize);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let d = seen[&x];
            if d == theta {
                continue;
            }
            for &y in self.adj(x) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                    e.insert(d + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(seen.into_keys().collect())
    }

    /// Writes one `label1 label2` line per edge, sorted by internal id pair.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.labels[u], self.labels[v])?;
        }
        Ok(())
    }
}

/// Parses a whitespace- or comma-separated edge list. Lines starting with
/// `#` or `%` and blank lines are skipped.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<Graph> {
    load_edge_list_with_report(source).map(|(g, _)| g)
}

pub fn load_edge_list_with_report<R: BufRead>(source: R) -> Result<(Graph, LoadReport)> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |s: &str| -> NodeId {
        if let Some(&id) = index.get(s) {
            return id;
        }
        let id = labels.len();
        labels.push(s.to_owned());
        index.insert(s.to_owned(), id);
        id
    };
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected two vertex labels, found {}", tokens.len()),
            });
        }
        let u = intern(tokens[0]);
        let v = intern(tokens[1]);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    Graph::build(labels, &edges)
}
