//! Structural similarity and agglomerative clustering into disjoint communities.
//!
//! Both similarities work on closed neighbourhoods `Γ(x) = Nei(x) ∪ {x}`:
//!
//! * 2S is the cosine structural similarity `|Γ(u) ∩ Γ(v)| / sqrt(|Γ(u)| |Γ(v)|)`.
//! * α-2S adds `α · t(u, v)` to the numerator, where `t` counts the edges
//!   among the shared members of `Γ(u) ∩ Γ(v)`.
//!
//! [`hierarchical_clustering`] starts from singletons and merges along edges in
//! order of decreasing similarity (single link). Edge similarities are computed
//! once, on the input graph. Every merge is a dendrogram level; the level that
//! is returned is chosen by a [`StoppingRule`].

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    TwoS,
    AlphaTwoS,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilaritySpec {
    pub kind: SimilarityKind,
    pub alpha: f64,
}

impl SimilaritySpec {
    pub fn two_s() -> Self {
        SimilaritySpec {
            kind: SimilarityKind::TwoS,
            alpha: 0.0,
        }
    }

    pub fn alpha_two_s(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(SimilaritySpec {
            kind: SimilarityKind::AlphaTwoS,
            alpha,
        })
    }

    pub fn evaluate(&self, g: &Graph, u: NodeId, v: NodeId) -> Result<f64> {
        match self.kind {
            SimilarityKind::TwoS => similarity_2s(g, u, v),
            SimilarityKind::AlphaTwoS => similarity_alpha2s(g, u, v, self.alpha),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must be a nonnegative number, got {alpha}"
        )))
    }
}

fn check_pair(g: &Graph, u: NodeId, v: NodeId) -> Result<()> {
    let n = g.node_count();
    for x in [u, v] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(Error::domain(
            "similarity of a vertex with itself is undefined",
        ));
    }
    Ok(())
}

/// Sorted closed neighbourhood of `x`.
fn closed_neighborhood(g: &Graph, x: NodeId) -> Vec<NodeId> {
    let adj = g.adj(x);
    let mut out = Vec::with_capacity(adj.len() + 1);
    let pos = adj.partition_point(|&w| w < x);
    out.extend_from_slice(&adj[..pos]);
    out.push(x);
    out.extend_from_slice(&adj[pos..]);
    out
}

pub(crate) fn intersect_sorted(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn count_common(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn similarity_2s(g: &Graph, u: NodeId, v: NodeId) -> Result<f64> {
    check_pair(g, u, v)?;
    let gu = closed_neighborhood(g, u);
    let gv = closed_neighborhood(g, v);
    let common = count_common(&gu, &gv);
    Ok(common as f64 / ((gu.len() * gv.len()) as f64).sqrt())
}

pub fn similarity_alpha2s(g: &Graph, u: NodeId, v: NodeId, alpha: f64) -> Result<f64> {
    check_pair(g, u, v)?;
    check_alpha(alpha)?;
    let gu = closed_neighborhood(g, u);
    let gv = closed_neighborhood(g, v);
    let common = intersect_sorted(&gu, &gv);
    // every edge inside `common` is seen from both endpoints
    let twice_links: usize = common
        .iter()
        .map(|&x| count_common(g.adj(x), &common))
        .sum();
    let links = (twice_links / 2) as f64;
    Ok((common.len() as f64 + alpha * links) / ((gu.len() * gv.len()) as f64).sqrt())
}

/// Disjoint cover of the vertex set by nonempty communities.
///
/// Communities are ordered by their smallest member, so equal partitions
/// always compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    communities: Vec<NodeSet>,
    assignment: Vec<usize>,
}

impl Partition {
    /// Builds a partition from a community label per vertex. Labels may be
    /// arbitrary; they are renumbered by smallest member.
    pub fn from_labels(labels: &[usize]) -> Self {
        let n = labels.len();
        let mut first_seen: std::collections::HashMap<usize, usize> = Default::default();
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            let idx = *first_seen.entry(l).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[idx].push(v);
        }
        // vertices are visited ascending, so group order is by smallest member
        let mut assignment = vec![0; n];
        for (c, members) in groups.iter().enumerate() {
            for &v in members {
                assignment[v] = c;
            }
        }
        Partition {
            communities: groups
                .into_iter()
                .map(NodeSet::from_sorted_unchecked)
                .collect(),
            assignment,
        }
    }

    /// Validates that `communities` is a disjoint cover of `0..n` without
    /// empty members.
    pub fn from_communities(n: usize, communities: Vec<NodeSet>) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in communities.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::domain("empty community"));
            }
            for v in members {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if labels[v] != usize::MAX {
                    return Err(Error::domain(format!("vertex {v} is in two communities")));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::domain(format!("vertex {v} is not in any community")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn whole(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn communities(&self) -> &[NodeSet] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_of(&self, v: NodeId) -> Option<usize> {
        self.assignment.get(v).copied()
    }

    pub fn community(&self, c: usize) -> &NodeSet {
        &self.communities[c]
    }

    /// Writes `label community_index` for every vertex, in id order.
    pub fn write<W: Write>(&self, g: &Graph, mut out: W) -> std::io::Result<()> {
        for (v, c) in self.assignment.iter().enumerate() {
            writeln!(out, "{} {}", g.label(v), c)?;
        }
        Ok(())
    }
}

pub fn size_com(p: &Partition, u: NodeId) -> Result<usize> {
    p.community_of(u)
        .map(|c| p.communities[c].len())
        .ok_or_else(|| Error::domain(format!("vertex {u} is not assigned to a community")))
}

/// Newman modularity `Σ_c [e_c/|E| - (d_c / 2|E|)²]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::domain(
            "modularity is undefined on an edgeless graph",
        ));
    }
    if p.node_count() != g.node_count() {
        return Err(Error::domain("partition does not match the graph"));
    }
    let mut intra = vec![0usize; p.len()];
    let mut degree = vec![0usize; p.len()];
    for u in 0..g.node_count() {
        let cu = p.assignment[u];
        degree[cu] += g.degree(u);
    }
    for (u, v) in g.edges() {
        if p.assignment[u] == p.assignment[v] {
            intra[p.assignment[u]] += 1;
        }
    }
    let m = m as f64;
    Ok(intra
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Splits a partition into singleton communities and the remaining ones,
/// the latter sorted by size descending then by smallest member ascending.
pub fn partition_split(p: &Partition) -> (Vec<NodeSet>, Vec<NodeSet>) {
    let (singles, mut big): (Vec<NodeSet>, Vec<NodeSet>) =
        p.communities.iter().cloned().partition(|c| c.len() == 1);
    big.sort_by(|a, b| b.len().cmp(&a.len()).then(a.min().cmp(&b.min())));
    (singles, big)
}

/// Vertices with neighbours in at least two distinct communities.
pub fn overlapping_nodes(g: &Graph, p: &Partition) -> NodeSet {
    (0..g.node_count())
        .filter(|&u| {
            let mut seen = None;
            g.adj(u).iter().any(|&w| {
                let c = p.assignment[w];
                match seen {
                    None => {
                        seen = Some(c);
                        false
                    }
                    Some(s) => s != c,
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingRule {
    /// Cut the dendrogram at the level of maximal modularity.
    #[default]
    ModularityPeak,
    /// Cut at the first level with at most this many communities.
    CommunityCount(usize),
}

/// One agglomeration step: the communities containing `u` and `v` merged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub u: NodeId,
    pub v: NodeId,
    pub similarity: f64,
    /// Modularity after this merge (`NaN` on edgeless graphs).
    pub modularity: f64,
    pub communities: usize,
}

/// Full merge history of an agglomerative run.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    n: usize,
    initial_modularity: f64,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Modularity of each level, starting with the all-singleton level.
    pub fn modularity_profile(&self) -> Vec<f64> {
        std::iter::once(self.initial_modularity)
            .chain(self.merges.iter().map(|m| m.modularity))
            .collect()
    }

    /// Number of merges to apply for the given rule.
    pub fn cut_level(&self, stop: StoppingRule) -> usize {
        match stop {
            StoppingRule::ModularityPeak => {
                let mut best = 0;
                let mut best_q = self.initial_modularity;
                for (i, m) in self.merges.iter().enumerate() {
                    // strict: the earliest level wins among equal peaks
                    if m.modularity > best_q {
                        best_q = m.modularity;
                        best = i + 1;
                    }
                }
                best
            }
            StoppingRule::CommunityCount(target) => {
                if self.n <= target {
                    return 0;
                }
                self.merges
                    .iter()
                    .position(|m| m.communities <= target)
                    .map(|i| i + 1)
                    .unwrap_or(self.merges.len())
            }
        }
    }

    pub fn partition_at(&self, level: usize) -> Partition {
        let mut uf = UnionFind::new(self.n);
        for m in &self.merges[..level.min(self.merges.len())] {
            uf.union(m.u, m.v);
        }
        let labels: Vec<usize> = (0..self.n).map(|v| uf.find(v)).collect();
        Partition::from_labels(&labels)
    }

    pub fn cut(&self, stop: StoppingRule) -> Partition {
        self.partition_at(self.cut_level(stop))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(ra)
    }

    pub(crate) fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Similarity of every edge, sorted by (similarity desc, u asc, v asc).
pub fn ranked_edges(g: &Graph, spec: SimilaritySpec) -> Result<Vec<(NodeId, NodeId, f64)>> {
    if spec.kind == SimilarityKind::AlphaTwoS {
        check_alpha(spec.alpha)?;
    }
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let mut ranked: Vec<(NodeId, NodeId, f64)> = edges
        .par_iter()
        .map(|&(u, v)| spec.evaluate(g, u, v).map(|s| (u, v, s)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    Ok(ranked)
}

/// Runs the agglomeration to completion and records every merge.
pub fn agglomerate(g: &Graph, spec: SimilaritySpec) -> Result<Dendrogram> {
    let n = g.node_count();
    let m = g.edge_count();
    let ranked = ranked_edges(g, spec)?;

    // label[v] = current community id; members kept per community so the
    // smaller side can be relabelled on merge
    let mut label: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<NodeId>> = (0..n).map(|v| vec![v]).collect();
    let mut intra = vec![0usize; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();

    let two_m = 2.0 * m as f64;
    let term = |e: usize, d: usize| -> f64 {
        if m == 0 {
            f64::NAN
        } else {
            e as f64 / m as f64 - (d as f64 / two_m).powi(2)
        }
    };
    let mut q: f64 = (0..n).map(|v| term(0, deg[v])).sum();
    let initial_modularity = q;
    let mut communities = n;
    let mut merges = Vec::new();

    for (u, v, s) in ranked {
        let (cu, cv) = (label[u], label[v]);
        if cu == cv {
            continue;
        }
        let (big, small) = if members[cu].len() >= members[cv].len() {
            (cu, cv)
        } else {
            (cv, cu)
        };
        let moved = std::mem::take(&mut members[small]);
        let between: usize = moved
            .iter()
            .map(|&x| g.adj(x).iter().filter(|&&y| label[y] == big).count())
            .sum();
        for &x in &moved {
            label[x] = big;
        }
        members[big].extend(moved);

        let merged_intra = intra[big] + intra[small] + between;
        let merged_deg = deg[big] + deg[small];
        q += term(merged_intra, merged_deg)
            - term(intra[big], deg[big])
            - term(intra[small], deg[small]);
        intra[big] = merged_intra;
        deg[big] = merged_deg;
        intra[small] = 0;
        deg[small] = 0;
        communities -= 1;

        merges.push(Merge {
            u,
            v,
            similarity: s,
            modularity: q,
            communities,
        });
    }

    Ok(Dendrogram {
        n,
        initial_modularity,
        merges,
    })
}

pub fn hierarchical_clustering(
    g: &Graph,
    spec: SimilaritySpec,
    stop: StoppingRule,
) -> Result<Partition> {
    Ok(agglomerate(g, spec)?.cut(stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    const EPS: f64 = 1e-12;

    fn set(ids: &[NodeId]) -> NodeSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn two_s_examples() {
        assert!((similarity_2s(&triangle(), 0, 1).unwrap() - 1.0).abs() < EPS);
        assert!((similarity_2s(&path3(), 0, 1).unwrap() - 2.0 / 6f64.sqrt()).abs() < EPS);
        assert!((similarity_2s(&single_edge(), 0, 1).unwrap() - 1.0).abs() < EPS);
        assert!(similarity_2s(&triangle(), 1, 1).is_err());
        assert!(similarity_2s(&triangle(), 0, 9).is_err());
    }

    #[test]
    fn alpha_two_s_examples() {
        assert!((similarity_alpha2s(&triangle(), 0, 1, 1.0).unwrap() - 2.0).abs() < EPS);
        assert!((similarity_alpha2s(&path3(), 0, 1, 1.0).unwrap() - 3.0 / 6f64.sqrt()).abs() < EPS);
        let g = two_triangles_bridge();
        for (u, v) in g.edges() {
            assert_eq!(
                similarity_alpha2s(&g, u, v, 0.0).unwrap(),
                similarity_2s(&g, u, v).unwrap()
            );
        }
        assert!(similarity_alpha2s(&g, 0, 1, -0.5).is_err());
        assert!(SimilaritySpec::alpha_two_s(f64::NAN).is_err());
    }

    #[test]
    fn clustering_two_triangles() {
        let g = two_triangles_bridge();
        let want = Partition::from_communities(6, vec![set(&[0, 1, 2]), set(&[3, 4, 5])]).unwrap();
        for spec in [
            SimilaritySpec::two_s(),
            SimilaritySpec::alpha_two_s(1.0).unwrap(),
        ] {
            let p = hierarchical_clustering(&g, spec, StoppingRule::ModularityPeak).unwrap();
            assert_eq!(p, want);
        }
    }

    #[test]
    fn clustering_edgeless_and_triangle() {
        let g = Graph::from_unlabeled(4, &[]).unwrap();
        let p =
            hierarchical_clustering(&g, SimilaritySpec::two_s(), StoppingRule::default()).unwrap();
        assert_eq!(p, Partition::singletons(4));

        let p = hierarchical_clustering(
            &triangle(),
            SimilaritySpec::two_s(),
            StoppingRule::default(),
        )
        .unwrap();
        assert_eq!(p, Partition::whole(3));
    }

    #[test]
    fn clustering_count_rule() {
        let g = two_triangles_bridge();
        let d = agglomerate(&g, SimilaritySpec::two_s()).unwrap();
        assert_eq!(d.cut(StoppingRule::CommunityCount(1)), Partition::whole(6));
        assert_eq!(
            d.cut(StoppingRule::CommunityCount(6)),
            Partition::singletons(6)
        );
        assert_eq!(d.cut(StoppingRule::CommunityCount(2)).len(), 2);
    }

    #[test]
    fn incremental_modularity_matches_direct() {
        let g = example_graph();
        let d = agglomerate(&g, SimilaritySpec::alpha_two_s(1.0).unwrap()).unwrap();
        let profile = d.modularity_profile();
        for (level, q) in profile.iter().enumerate() {
            let direct = modularity(&g, &d.partition_at(level)).unwrap();
            assert!((q - direct).abs() < 1e-12, "level {level}: {q} vs {direct}");
        }
    }

    #[test]
    fn modularity_examples() {
        assert!(modularity(&triangle(), &Partition::whole(3)).unwrap().abs() < EPS);
        let g = two_disjoint_triangles();
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < EPS);
        let g = example_graph();
        assert!(
            modularity(&g, &Partition::whole(g.node_count()))
                .unwrap()
                .abs()
                < EPS
        );
        let empty = Graph::from_unlabeled(2, &[]).unwrap();
        assert!(modularity(&empty, &Partition::whole(2)).is_err());
    }

    #[test]
    fn split_examples() {
        // a=0, b,c = 1,2, d,e,f = 3,4,5
        let p = Partition::from_labels(&[0, 1, 1, 2, 2, 2]);
        let (singles, big) = partition_split(&p);
        assert_eq!(singles, vec![set(&[0])]);
        assert_eq!(big, vec![set(&[3, 4, 5]), set(&[1, 2])]);

        let (singles, big) = partition_split(&Partition::singletons(3));
        assert_eq!(singles.len(), 3);
        assert!(big.is_empty());

        let p = Partition::from_labels(&[7, 9, 9, 7, 7, 9]);
        let (_, big) = partition_split(&p);
        assert_eq!(big[0].min(), Some(0));
        assert_eq!(big[1].min(), Some(1));
    }

    #[test]
    fn overlapping_examples() {
        let g = two_triangles_bridge();
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(overlapping_nodes(&g, &p), set(&[2, 3]));
        assert!(overlapping_nodes(&g, &Partition::whole(6)).is_empty());

        let g = Graph::from_unlabeled(3, &[(0, 1)]).unwrap();
        assert!(!overlapping_nodes(&g, &Partition::singletons(3)).contains(2));
    }

    #[test]
    fn size_com_examples() {
        let p = Partition::from_labels(&[0, 1, 1]);
        assert_eq!(size_com(&p, 0).unwrap(), 1);
        assert_eq!(size_com(&p, 1).unwrap(), 2);
        assert_eq!(size_com(&Partition::singletons(1), 0).unwrap(), 1);
        assert!(size_com(&p, 5).is_err());
    }

    #[test]
    fn from_communities_rejects_bad_input() {
        assert!(Partition::from_communities(3, vec![set(&[0, 1]), set(&[1, 2])]).is_err());
        assert!(Partition::from_communities(3, vec![set(&[0, 1])]).is_err());
        assert!(Partition::from_communities(2, vec![set(&[0, 1]), NodeSet::new()]).is_err());
    }

    #[test]
    fn partition_text_format() {
        let g = path3();
        let mut buf = Vec::new();
        Partition::from_labels(&[4, 4, 2])
            .write(&g, &mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0\n1 0\n2 1\n");
    }
}
