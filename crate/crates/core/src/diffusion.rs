//! Independent Cascade simulation and spread estimation.
//!
//! Every activation attempt `u -> v` is decided by a counter-based coin,
//! `stream.bernoulli_at(arc(u, v), p)`. A replication is therefore a fixed
//! random orientation of live arcs and the cascade from `S` is the set reached
//! from `S` over live arcs. This has the IC distribution (each attempt is an
//! independent Bernoulli trial, made at most once) and also makes the
//! Monte Carlo estimate, for a fixed master seed, a monotone submodular set
//! function of `S`. The lazy evaluation in CELF relies on the latter.

use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;

use crate::community::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::rng::Stream;

/// Largest edge count accepted by the exact live-edge enumeration.
pub const EXACT_EDGE_LIMIT: usize = 24;
/// Largest number of seed sets [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_SUBSET_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub p: f64,
    pub r: usize,
    pub master_seed: u64,
}

impl DiffusionParams {
    pub fn new(p: f64, r: usize, master_seed: u64) -> Result<Self> {
        let params = DiffusionParams { p, r, master_seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::domain(format!(
                "activation probability must lie in [0, 1], got {}",
                self.p
            )));
        }
        if self.r == 0 {
            return Err(Error::domain("replication count must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(self, master_seed: u64) -> Self {
        DiffusionParams {
            master_seed,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub r: usize,
    /// Sum of final active-set sizes over all replications. Exact, so
    /// comparisons between estimates sharing `r` can be made on it.
    pub total: u64,
}

impl SpreadEstimate {
    fn from_sums(total: u64, sum_sq: u128, r: usize) -> Self {
        let rf = r as f64;
        let mean = total as f64 / rf;
        let std_error = if r > 1 {
            // integer sums keep this exact up to the final division
            let num = (sum_sq * r as u128).saturating_sub((total as u128) * (total as u128));
            let var = num as f64 / (rf * (rf - 1.0));
            (var / rf).sqrt()
        } else {
            0.0
        };
        SpreadEstimate {
            mean,
            std_error,
            r,
            total,
        }
    }
}

#[inline]
fn arc(u: NodeId, v: NodeId) -> u64 {
    ((u as u64) << 32) | v as u64
}

/// Reusable buffers for running many cascades on the same graph.
#[derive(Debug, Clone)]
pub struct Cascade {
    mark: Vec<u32>,
    epoch: u32,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl Cascade {
    pub fn new(n: usize) -> Self {
        Cascade {
            mark: vec![0; n],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Runs one cascade and returns the number of active vertices.
    /// `seeds` must be in range and duplicate free.
    pub fn run(&mut self, g: &Graph, seeds: &[NodeId], p: f64, stream: &Stream) -> usize {
        self.run_observed(g, seeds, p, stream, |_, _, _| {})
    }

    /// As [`Cascade::run`], calling `on_activate(round, activator, target)`
    /// for every successful attempt, in ascending (activator, target) order
    /// within each round.
    pub fn run_observed<F>(
        &mut self,
        g: &Graph,
        seeds: &[NodeId],
        p: f64,
        stream: &Stream,
        mut on_activate: F,
    ) -> usize
    where
        F: FnMut(usize, NodeId, NodeId),
    {
        self.reset();
        let epoch = self.epoch;
        self.frontier.clear();
        for &s in seeds {
            if self.mark[s] != epoch {
                self.mark[s] = epoch;
                self.frontier.push(s);
            }
        }
        self.frontier.sort_unstable();
        let mut active = self.frontier.len();
        let mut round = 0;
        while !self.frontier.is_empty() {
            round += 1;
            self.next.clear();
            for &u in &self.frontier {
                for &v in g.adj(u) {
                    if self.mark[v] != epoch && stream.bernoulli_at(arc(u, v), p) {
                        self.mark[v] = epoch;
                        self.next.push(v);
                        on_activate(round, u, v);
                    }
                }
            }
            active += self.next.len();
            self.next.sort_unstable();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
        active
    }

    fn active_set(&self, n: usize) -> NodeSet {
        (0..n).filter(|&v| self.mark[v] == self.epoch).collect()
    }
}

fn check_seeds(g: &Graph, seeds: &NodeSet) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::domain("seed set is empty"));
    }
    let n = g.node_count();
    match seeds.iter().find(|&s| s >= n) {
        Some(v) => Err(Error::VertexOutOfRange { vertex: v, n }),
        None => Ok(()),
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "activation probability must lie in [0, 1], got {p}"
        )))
    }
}

/// Final active set of one cascade realisation.
pub fn simulate_once(g: &Graph, seeds: &NodeSet, p: f64, stream: &Stream) -> Result<NodeSet> {
    check_seeds(g, seeds)?;
    check_p(p)?;
    let mut c = Cascade::new(g.node_count());
    c.run(g, seeds.as_slice(), p, stream);
    Ok(c.active_set(g.node_count()))
}

/// Runs one cascade and writes a `round activator target` line per activation.
pub fn simulate_traced<W: Write>(
    g: &Graph,
    seeds: &NodeSet,
    p: f64,
    stream: &Stream,
    mut out: W,
) -> Result<NodeSet> {
    check_seeds(g, seeds)?;
    check_p(p)?;
    let mut c = Cascade::new(g.node_count());
    let mut io_err = None;
    c.run_observed(g, seeds.as_slice(), p, stream, |round, u, v| {
        if io_err.is_none() {
            if let Err(e) = writeln!(out, "{} {} {}", round, g.label(u), g.label(v)) {
                io_err = Some(e);
            }
        }
    });
    match io_err {
        Some(e) => Err(e.into()),
        None => Ok(c.active_set(g.node_count())),
    }
}

/// Monte Carlo estimator bound to one graph and one set of parameters.
///
/// Replication `i` always uses `Stream::new(master_seed, i)`, whatever the
/// seed set, so two estimates from the same estimator use common random
/// numbers.
#[derive(Debug, Clone, Copy)]
pub struct Estimator<'g> {
    graph: &'g Graph,
    params: DiffusionParams,
}

impl<'g> Estimator<'g> {
    pub fn new(graph: &'g Graph, params: DiffusionParams) -> Result<Self> {
        params.validate()?;
        Ok(Estimator { graph, params })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn params(&self) -> DiffusionParams {
        self.params
    }

    /// Estimates spread for an unchecked seed slice (in range, no duplicates).
    pub fn estimate(&self, seeds: &[NodeId]) -> SpreadEstimate {
        let g = self.graph;
        let DiffusionParams { p, r, master_seed } = self.params;
        let (total, sum_sq) = (0..r)
            .into_par_iter()
            .with_min_len(8)
            .map_init(
                || Cascade::new(g.node_count()),
                |c, i| {
                    let size = c.run(g, seeds, p, &Stream::new(master_seed, i as u64)) as u64;
                    (size, (size as u128) * (size as u128))
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        SpreadEstimate::from_sums(total, sum_sq, r)
    }
}

pub fn estimate_spread(
    g: &Graph,
    seeds: &NodeSet,
    params: DiffusionParams,
) -> Result<SpreadEstimate> {
    check_seeds(g, seeds)?;
    Ok(Estimator::new(g, params)?.estimate(seeds.as_slice()))
}

/// Exact expected spread by enumerating all live-edge subsets.
pub fn exact_spread(g: &Graph, seeds: &NodeSet, p: f64) -> Result<f64> {
    check_seeds(g, seeds)?;
    Ok(exact_spread_many(g, std::slice::from_ref(&seeds.as_slice().to_vec()), p)?[0])
}

/// [`exact_spread`] for several seed sets sharing one enumeration.
pub fn exact_spread_many(g: &Graph, seed_sets: &[Vec<NodeId>], p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    let m = g.edge_count();
    if m > EXACT_EDGE_LIMIT {
        return Err(Error::TooLarge(format!(
            "exact enumeration needs |E| <= {EXACT_EDGE_LIMIT}, graph has {m}"
        )));
    }
    let n = g.node_count();
    for s in seed_sets {
        if s.is_empty() {
            return Err(Error::domain("seed set is empty"));
        }
        if let Some(&v) = s.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let keep_pow: Vec<f64> = (0..=m).map(|i| p.powi(i as i32)).collect();
    let drop_pow: Vec<f64> = (0..=m).map(|i| (1.0 - p).powi(i as i32)).collect();

    // fixed chunking keeps the floating-point summation order independent of
    // the thread pool
    const CHUNK: u64 = 1 << 12;
    let masks = 1u64 << m;
    let chunks = masks.div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; seed_sets.len()];
            let mut roots = Vec::new();
            for mask in c * CHUNK..((c + 1) * CHUNK).min(masks) {
                let kept = mask.count_ones() as usize;
                let weight = keep_pow[kept] * drop_pow[m - kept];
                if weight == 0.0 {
                    continue;
                }
                let mut uf = UnionFind::new(n);
                for (i, &(u, v)) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        uf.union(u, v);
                    }
                }
                for (slot, s) in acc.iter_mut().zip(seed_sets) {
                    roots.clear();
                    roots.extend(s.iter().map(|&v| uf.find(v)));
                    roots.sort_unstable();
                    roots.dedup();
                    let reached: usize = roots.iter().map(|&r| uf.size_of(r)).sum();
                    *slot += weight * reached as f64;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; seed_sets.len()];
    for part in partials {
        for (o, x) in out.iter_mut().zip(part) {
            *o += x;
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Optimal seed set of size `k` by exhaustive search with the exact oracle.
/// Ties go to the lexicographically smallest set.
pub fn brute_force_optimum(g: &Graph, k: usize, p: f64) -> Result<(Vec<NodeId>, f64)> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(Error::domain(format!("k must lie in [1, {n}], got {k}")));
    }
    let count = binomial(n, k);
    if count > BRUTE_FORCE_SUBSET_LIMIT {
        return Err(Error::TooLarge(format!(
            "C({n}, {k}) = {count} seed sets exceeds {BRUTE_FORCE_SUBSET_LIMIT}"
        )));
    }
    let sets: Vec<Vec<NodeId>> = (0..n).combinations(k).collect();
    let values = exact_spread_many(g, &sets, p)?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        // symmetric sets can differ in the last bits of a long sum
        if v > values[best] + 1e-9 * values[best].max(1.0) {
            best = i;
        }
    }
    Ok((sets[best].clone(), values[best]))
}
