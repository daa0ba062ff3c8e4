//! Seed selection: the community-based three-phase selector, Greedy and CELF.
//!
//! All Monte Carlo comparisons inside one selection run share common random
//! numbers: each role (within-community ranking, refinement, marginal gains)
//! gets one sub-seed derived from the master seed, and every candidate is
//! evaluated on the same replications. Under the counter-based cascade this
//! makes the marginal-gain estimate an exact submodular function, so CELF
//! returns the same sequence as Greedy while evaluating far fewer sets.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::community::{partition_split, size_com, Partition};
use crate::diffusion::{DiffusionParams, Estimator};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::rng::{derive_seed, tag};
use crate::scoring::{PropagatorScores, ScoreConfig};

const PHASE1_TAG: u64 = tag("community-spread");
const REFINE_TAG: u64 = tag("refinement");
const MARGINAL_TAG: u64 = tag("marginal-gain");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Hcim,
    AlphaHcim,
    Greedy,
    Celf,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Hcim,
        Method::AlphaHcim,
        Method::Greedy,
        Method::Celf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hcim => "hcim",
            Method::AlphaHcim => "alpha-hcim",
            Method::Greedy => "greedy",
            Method::Celf => "celf",
        }
    }

    pub fn is_community_based(&self) -> bool {
        matches!(self, Method::Hcim | Method::AlphaHcim)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain(format!("unknown method {s:?}")))
    }
}

/// Optional wall-clock limit checked between spread evaluations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn at(instant: Instant) -> Self {
        Deadline(Some(instant))
    }

    pub fn check(&self) -> Result<()> {
        match self.0 {
            Some(t) if Instant::now() >= t => Err(Error::TimedOut),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    /// Selected vertices in order of selection.
    pub members: Vec<NodeId>,
    pub method: Method,
    pub k: usize,
    pub params: DiffusionParams,
    pub theta: Option<usize>,
    pub alpha: Option<f64>,
    /// Number of Monte Carlo spread estimates performed while selecting.
    pub spread_evaluations: u64,
}

impl SeedSet {
    pub fn node_set(&self) -> NodeSet {
        self.members.iter().copied().collect()
    }

    /// Re-tags a community-based selection with the clustering it came from.
    pub fn with_method(mut self, method: Method, alpha: Option<f64>) -> Self {
        self.method = method;
        self.alpha = alpha;
        self
    }

    pub fn header(&self) -> String {
        let mut h = format!(
            "# method={} k={} p={} r={} seed={}",
            self.method, self.k, self.params.p, self.params.r, self.params.master_seed
        );
        if let Some(t) = self.theta {
            h.push_str(&format!(" theta={t}"));
        }
        if let Some(a) = self.alpha {
            h.push_str(&format!(" alpha={a}"));
        }
        h
    }

    /// Header line with method and parameters, then one label per line.
    pub fn write<W: Write>(&self, g: &Graph, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header())?;
        for &v in &self.members {
            writeln!(out, "{}", g.label(v))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPick {
    pub round: usize,
    /// Index into the size-sorted list of multi-vertex communities.
    pub community: usize,
    pub node: NodeId,
    /// Estimated spread of `node` inside its community's induced subgraph.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorePick {
    pub node: NodeId,
    pub score: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapAttempt {
    pub incoming: NodeId,
    pub outgoing: NodeId,
    pub spread_before: f64,
    pub spread_after: f64,
    pub accepted: bool,
}

/// Log of every decision taken by [`select_community_based`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionTrace {
    pub community_picks: Vec<CommunityPick>,
    pub score_picks: Vec<ScorePick>,
    pub swaps: Vec<SwapAttempt>,
}

impl SelectionTrace {
    /// Rebuilds the final seed order from the logged decisions alone.
    pub fn replay(&self) -> Vec<NodeId> {
        let mut s: Vec<NodeId> = self.community_picks.iter().map(|p| p.node).collect();
        s.extend(self.score_picks.iter().map(|p| p.node));
        for swap in self.swaps.iter().filter(|s| s.accepted) {
            s.retain(|&v| v != swap.outgoing);
            s.push(swap.incoming);
        }
        s
    }

    pub fn write<W: Write>(&self, g: &Graph, mut out: W) -> std::io::Result<()> {
        for p in &self.community_picks {
            writeln!(
                out,
                "community round={} community={} node={} spread={:.4}",
                p.round,
                p.community,
                g.label(p.node),
                p.spread
            )?;
        }
        for p in &self.score_picks {
            writeln!(out, "score node={} score={}", g.label(p.node), p.score)?;
        }
        for s in &self.swaps {
            writeln!(
                out,
                "swap in={} out={} before={:.4} after={:.4} accepted={}",
                g.label(s.incoming),
                g.label(s.outgoing),
                s.spread_before,
                s.spread_after,
                s.accepted
            )?;
        }
        Ok(())
    }
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    let n = g.node_count();
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    if k > n {
        return Err(Error::domain(format!(
            "k = {k} exceeds the vertex count {n}"
        )));
    }
    Ok(())
}

/// Highest-spread candidate on common random numbers; ties to the smallest id.
fn best_single<'g>(est: &Estimator<'g>, candidates: &[NodeId]) -> (NodeId, u64) {
    candidates
        .par_iter()
        .map(|&u| (est.estimate(&[u]).total, Reverse(u)))
        .max()
        .map(|(t, Reverse(u))| (u, t))
        .expect("candidates are nonempty")
}

pub fn select_community_based(
    g: &Graph,
    partition: &Partition,
    k: usize,
    params: DiffusionParams,
    theta: usize,
) -> Result<(SeedSet, SelectionTrace)> {
    select_community_based_until(g, partition, k, params, theta, Deadline::none())
}

pub fn select_community_based_until(
    g: &Graph,
    partition: &Partition,
    k: usize,
    params: DiffusionParams,
    theta: usize,
    deadline: Deadline,
) -> Result<(SeedSet, SelectionTrace)> {
    check_k(g, k)?;
    params.validate()?;
    if partition.node_count() != g.node_count() {
        return Err(Error::domain("partition does not match the graph"));
    }
    let mut trace = SelectionTrace::default();
    let mut evaluations = 0u64;
    let mut seeds: Vec<NodeId> = Vec::with_capacity(k);

    let (singles, big) = partition_split(partition);

    // phase 1: round-robin over the big communities, largest first
    let inner = params.with_seed(derive_seed(params.master_seed, PHASE1_TAG));
    let mut pools: Vec<Vec<NodeId>> = big.iter().map(|c| c.as_slice().to_vec()).collect();
    let mut round = 0;
    'rounds: while seeds.len() < k && pools.iter().any(|p| !p.is_empty()) {
        for (ci, pool) in pools.iter_mut().enumerate() {
            if pool.is_empty() {
                continue;
            }
            if seeds.len() == k {
                break 'rounds;
            }
            deadline.check()?;
            let members = NodeSet::from_sorted_unchecked(pool.clone());
            let sub = g.induced_subgraph(&members)?;
            let est = Estimator::new(&sub, inner)?;
            let local: Vec<NodeId> = (0..pool.len()).collect();
            let (best, total) = best_single(&est, &local);
            evaluations += pool.len() as u64;
            let node = pool.remove(best);
            seeds.push(node);
            trace.community_picks.push(CommunityPick {
                round,
                community: ci,
                node,
                spread: total as f64 / inner.r as f64,
            });
        }
        round += 1;
    }

    // phase 2: fill up with the lowest-scoring singleton vertices
    let scores = PropagatorScores::new(g, ScoreConfig { theta });
    let mut pool: NodeSet = singles.iter().filter_map(|c| c.min()).collect();
    while seeds.len() < k {
        let node = scores.min_over(pool.iter())?;
        pool.remove(node);
        seeds.push(node);
        trace.score_picks.push(ScorePick {
            node,
            score: scores.score(node)?,
        });
    }

    // phase 3: try replacing the seed from the smallest community
    if !pool.is_empty() {
        let est = Estimator::new(
            g,
            params.with_seed(derive_seed(params.master_seed, REFINE_TAG)),
        )?;
        deadline.check()?;
        let before = est.estimate(&seeds);
        evaluations += 1;
        let sizes: Vec<usize> = seeds
            .iter()
            .map(|&v| size_com(partition, v))
            .collect::<Result<_>>()?;
        // min community size, ties to the most recently added
        let out_pos = (0..seeds.len())
            .rev()
            .min_by_key(|&i| sizes[i])
            .expect("k >= 1");
        let outgoing = seeds[out_pos];
        loop {
            deadline.check()?;
            let incoming = scores.min_over(pool.iter())?;
            let mut candidate = seeds.clone();
            candidate.remove(out_pos);
            candidate.push(incoming);
            let after = est.estimate(&candidate);
            evaluations += 1;
            let accepted = after.total > before.total;
            trace.swaps.push(SwapAttempt {
                incoming,
                outgoing,
                spread_before: before.mean,
                spread_after: after.mean,
                accepted,
            });
            if accepted {
                seeds = candidate;
                break;
            }
            pool.remove(incoming);
            if pool.is_empty() {
                break;
            }
        }
    }

    debug_assert_eq!(trace.replay(), seeds);
    Ok((
        SeedSet {
            members: seeds,
            method: Method::Hcim,
            k,
            params,
            theta: Some(theta),
            alpha: None,
            spread_evaluations: evaluations,
        },
        trace,
    ))
}

pub fn greedy(g: &Graph, k: usize, params: DiffusionParams) -> Result<SeedSet> {
    greedy_until(g, k, params, Deadline::none())
}

pub fn greedy_until(
    g: &Graph,
    k: usize,
    params: DiffusionParams,
    deadline: Deadline,
) -> Result<SeedSet> {
    check_k(g, k)?;
    let est = Estimator::new(
        g,
        params.with_seed(derive_seed(params.master_seed, MARGINAL_TAG)),
    )?;
    let n = g.node_count();
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut evaluations = 0u64;
    for _ in 0..k {
        deadline.check()?;
        let candidates: Vec<NodeId> = (0..n).filter(|&u| !chosen[u]).collect();
        let (_, Reverse(best)) = candidates
            .par_iter()
            .map(|&u| {
                let mut s = seeds.clone();
                s.push(u);
                (est.estimate(&s).total, Reverse(u))
            })
            .max()
            .expect("k <= n leaves a candidate");
        evaluations += candidates.len() as u64;
        chosen[best] = true;
        seeds.push(best);
    }
    Ok(SeedSet {
        members: seeds,
        method: Method::Greedy,
        k,
        params,
        theta: None,
        alpha: None,
        spread_evaluations: evaluations,
    })
}

pub fn celf(g: &Graph, k: usize, params: DiffusionParams) -> Result<SeedSet> {
    celf_until(g, k, params, Deadline::none())
}

pub fn celf_until(
    g: &Graph,
    k: usize,
    params: DiffusionParams,
    deadline: Deadline,
) -> Result<SeedSet> {
    check_k(g, k)?;
    let est = Estimator::new(
        g,
        params.with_seed(derive_seed(params.master_seed, MARGINAL_TAG)),
    )?;
    let n = g.node_count();
    deadline.check()?;
    // (gain, id reversed so smaller ids win ties, round the gain was computed in)
    let mut heap: BinaryHeap<(u64, Reverse<NodeId>, usize)> = (0..n)
        .into_par_iter()
        .map(|u| (est.estimate(&[u]).total, Reverse(u), 0))
        .collect::<Vec<_>>()
        .into();
    let mut evaluations = n as u64;
    let mut seeds: Vec<NodeId> = Vec::with_capacity(k);
    let mut current = 0u64;
    for round in 0..k {
        loop {
            let (gain, Reverse(u), stamp) = heap.pop().expect("k <= n leaves a candidate");
            if stamp == round {
                seeds.push(u);
                current += gain;
                break;
            }
            deadline.check()?;
            let mut s = seeds.clone();
            s.push(u);
            let total = est.estimate(&s).total;
            evaluations += 1;
            let fresh = total
                .checked_sub(current)
                .expect("spread estimate is monotone under common random numbers");
            heap.push((fresh, Reverse(u), round));
        }
    }
    Ok(SeedSet {
        members: seeds,
        method: Method::Celf,
        k,
        params,
        theta: None,
        alpha: None,
        spread_evaluations: evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::exact_spread;
    use crate::fixtures::*;

    fn params(p: f64, r: usize) -> DiffusionParams {
        DiffusionParams::new(p, r, 2024).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("louvain".parse::<Method>().is_err());
    }

    #[test]
    fn two_triangles_one_seed_each() {
        let g = two_triangles_bridge();
        let part = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let (seeds, trace) = select_community_based(&g, &part, 2, params(0.5, 200), 2).unwrap();
        assert_eq!(seeds.members.len(), 2);
        assert!(seeds.members[0] < 3);
        assert!(seeds.members[1] >= 3);
        assert_eq!(trace.community_picks.len(), 2);
        assert!(trace.score_picks.is_empty() && trace.swaps.is_empty());

        // every triangle vertex has the same exact spread inside its triangle
        let tri = g.induced_subgraph(&(0..3).collect()).unwrap();
        let vals: Vec<f64> = (0..3)
            .map(|v| exact_spread(&tri, &[v].into_iter().collect(), 0.5).unwrap())
            .collect();
        assert!(vals.iter().all(|&x| (x - vals[0]).abs() < 1e-12));
    }

    #[test]
    fn one_pick_per_big_community_without_singletons() {
        let g = two_disjoint_triangles();
        let part = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let (seeds, trace) = select_community_based(&g, &part, 2, params(0.3, 50), 2).unwrap();
        assert_eq!(seeds.members.len(), 2);
        assert_eq!(trace.community_picks.len(), 2);
        assert_eq!(trace.community_picks[0].community, 0);
        assert_eq!(trace.community_picks[1].community, 1);
    }

    #[test]
    fn phase_two_and_three_on_example_graph() {
        let g = example_graph();
        let n = g.node_count();
        // one big community {a, c}, everything else singleton
        let mut labels: Vec<usize> = (0..n).collect();
        labels[g.id_of("c").unwrap()] = labels[g.id_of("a").unwrap()];
        let part = Partition::from_labels(&labels);
        let (seeds, trace) = select_community_based(&g, &part, 4, params(0.2, 100), 2).unwrap();
        assert_eq!(seeds.members.len(), 4);
        assert_eq!(trace.community_picks.len(), 2);
        assert_eq!(trace.score_picks.len(), 2);
        assert!(!trace.swaps.is_empty());
        assert_eq!(trace.replay(), seeds.members);
        for s in &trace.swaps {
            if s.accepted {
                assert!(s.spread_after > s.spread_before);
            }
        }
        let distinct: NodeSet = seeds.members.iter().copied().collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn multi_round_phase_one() {
        let g = two_triangles_bridge();
        let part = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let (seeds, trace) = select_community_based(&g, &part, 5, params(0.5, 50), 2).unwrap();
        assert_eq!(seeds.members.len(), 5);
        let rounds: Vec<usize> = trace.community_picks.iter().map(|p| p.round).collect();
        assert_eq!(rounds, vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn k_bounds() {
        let g = triangle();
        let part = Partition::whole(3);
        assert!(select_community_based(&g, &part, 0, params(0.5, 10), 2).is_err());
        assert!(select_community_based(&g, &part, 4, params(0.5, 10), 2).is_err());
        assert!(greedy(&g, 0, params(0.5, 10)).is_err());
        assert!(celf(&g, 4, params(0.5, 10)).is_err());
    }

    #[test]
    fn greedy_picks_star_centre() {
        let g = star4();
        let s = greedy(&g, 1, params(0.5, 2000)).unwrap();
        assert_eq!(s.members, vec![0]);
        let s = celf(&g, 1, params(0.5, 2000)).unwrap();
        assert_eq!(s.members, vec![0]);
    }

    #[test]
    fn k_equals_n_selects_everything() {
        let g = example_graph();
        let n = g.node_count();
        for s in [
            greedy(&g, n, params(0.1, 20)).unwrap(),
            celf(&g, n, params(0.1, 20)).unwrap(),
        ] {
            let all: NodeSet = (0..n).collect();
            assert_eq!(s.node_set(), all);
        }
        let part = Partition::from_labels(&(0..n).map(|v| v % 3).collect::<Vec<_>>());
        let (s, _) = select_community_based(&g, &part, n, params(0.1, 20), 2).unwrap();
        assert_eq!(s.node_set().len(), n);
    }

    #[test]
    fn celf_matches_greedy_and_saves_work() {
        let g = example_graph();
        for p in [0.1, 0.3, 0.6] {
            let a = greedy(&g, 5, params(p, 100)).unwrap();
            let b = celf(&g, 5, params(p, 100)).unwrap();
            assert_eq!(a.members, b.members, "p = {p}");
            assert!(b.spread_evaluations < a.spread_evaluations);
        }
    }

    #[test]
    fn expired_deadline_times_out() {
        let g = example_graph();
        let past = Deadline::at(Instant::now());
        assert!(matches!(
            greedy_until(&g, 2, params(0.1, 10), past),
            Err(Error::TimedOut)
        ));
        assert!(matches!(
            celf_until(&g, 2, params(0.1, 10), past),
            Err(Error::TimedOut)
        ));
    }

    #[test]
    fn seed_file_format() {
        let g = path3();
        let s = greedy(&g, 2, DiffusionParams::new(0.5, 10, 7).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "# method=greedy k=2 p=0.5 r=10 seed=7"
        );
        assert_eq!(lines.count(), 2);
    }
}
