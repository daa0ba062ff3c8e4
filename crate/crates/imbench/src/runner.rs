//! Executes the experiment grid.

use std::fs::File;
use std::io::BufReader;
use std::time::{Duration, Instant};

use hcim::community::{hierarchical_clustering, partition_split};
use hcim::diffusion::{DiffusionParams, Estimator};
use hcim::graph::{load_edge_list_with_report, LoadReport};
use hcim::rng::{derive_seed, tag};
use hcim::seedsel::{
    celf_until, greedy_until, select_community_based_until, Deadline, Method, SeedSet,
};
use hcim::{modularity, Error, Graph, Partition, SimilaritySpec, StoppingRule};

use crate::config::{DatasetRef, ExperimentConfig};

/// Sub-seed for the final spread of every seed set, shared by all methods.
pub const REPORT_TAG: u64 = tag("report");

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStats {
    pub dataset: String,
    pub similarity: &'static str,
    pub alpha: Option<f64>,
    pub communities: usize,
    pub big_communities: usize,
    pub singletons: usize,
    pub modularity: f64,
    pub runtime_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dataset: String,
    pub method: Method,
    pub k: usize,
    pub p: f64,
    pub r: usize,
    pub theta: Option<usize>,
    pub alpha: Option<f64>,
    /// `(mean, std_error)`; `None` for timed-out cells.
    pub sigma: Option<(f64, f64)>,
    pub runtime_s: Option<f64>,
    pub timed_out: bool,
    pub seeds: Vec<String>,
    pub spread_evaluations: u64,
    /// Community count and modularity of the partition the method used.
    pub partition: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub dataset: String,
    pub cell: Option<(Method, usize, f64)>,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentResult>,
    pub partitions: Vec<PartitionStats>,
    pub failures: Vec<Failure>,
    /// Non-fatal input issues, such as dropped self-loops.
    pub warnings: Vec<String>,
    pub timing: bool,
}

pub fn load_dataset(d: &DatasetRef) -> hcim::Result<Graph> {
    load_dataset_with_report(d).map(|(g, _)| g)
}

pub fn load_dataset_with_report(d: &DatasetRef) -> hcim::Result<(Graph, LoadReport)> {
    let file = File::open(&d.path)?;
    load_edge_list_with_report(BufReader::new(file))
}

pub fn describe_load(name: &str, r: &LoadReport) -> Option<String> {
    (r.self_loops + r.duplicate_edges > 0).then(|| {
        format!(
            "{name}: dropped {} self-loops and {} duplicate edges",
            r.self_loops, r.duplicate_edges
        )
    })
}

fn spec_for(method: Method, alpha: f64) -> Option<SimilaritySpec> {
    match method {
        Method::Hcim => Some(SimilaritySpec::two_s()),
        Method::AlphaHcim => {
            Some(SimilaritySpec::alpha_two_s(alpha).expect("alpha validated by config"))
        }
        Method::Greedy | Method::Celf => None,
    }
}

fn similarity_name(method: Method) -> &'static str {
    match method {
        Method::AlphaHcim => "alpha2s",
        _ => "2s",
    }
}

/// Runs every cell of the grid, using a pool of `cfg.workers` threads when set.
pub fn run_experiment(cfg: &ExperimentConfig) -> hcim::Result<ExperimentReport> {
    match cfg.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(|| run_grid(cfg)))
        }
        None => Ok(run_grid(cfg)),
    }
}

fn run_grid(cfg: &ExperimentConfig) -> ExperimentReport {
    let mut report = ExperimentReport {
        timing: cfg.timing,
        ..Default::default()
    };
    let stop = cfg
        .communities
        .map_or(StoppingRule::ModularityPeak, StoppingRule::CommunityCount);
    let elapsed = |t: Instant| cfg.timing.then(|| t.elapsed().as_secs_f64());

    for dataset in &cfg.datasets {
        let g = match load_dataset_with_report(dataset) {
            Ok((g, load)) => {
                report.warnings.extend(describe_load(&dataset.name, &load));
                g
            }
            Err(e) => {
                report.failures.push(Failure {
                    dataset: dataset.name.clone(),
                    cell: None,
                    message: format!("{}: {e}", dataset.path.display()),
                });
                continue;
            }
        };

        // one partition per similarity, shared by the whole sweep
        let mut partitions: Vec<(Method, Partition, (usize, f64))> = Vec::new();
        for &method in &cfg.methods {
            let Some(spec) = spec_for(method, cfg.alpha) else {
                continue;
            };
            let t = Instant::now();
            let built = hierarchical_clustering(&g, spec, stop)
                .and_then(|p| modularity(&g, &p).map(|q| (p, q)));
            let runtime_s = elapsed(t);
            match built {
                Ok((p, q)) => {
                    let (singles, big) = partition_split(&p);
                    report.partitions.push(PartitionStats {
                        dataset: dataset.name.clone(),
                        similarity: similarity_name(method),
                        alpha: (method == Method::AlphaHcim).then_some(cfg.alpha),
                        communities: p.len(),
                        big_communities: big.len(),
                        singletons: singles.len(),
                        modularity: q,
                        runtime_s,
                    });
                    let stats = (p.len(), q);
                    partitions.push((method, p, stats));
                }
                Err(e) => report.failures.push(Failure {
                    dataset: dataset.name.clone(),
                    cell: None,
                    message: format!("community detection for {method}: {e}"),
                }),
            }
        }

        for &method in &cfg.methods {
            let partition = partitions.iter().find(|(m, ..)| *m == method);
            if method.is_community_based() && partition.is_none() {
                continue;
            }
            for &k in &cfg.k {
                for &p in &cfg.p {
                    let params = DiffusionParams {
                        p,
                        r: cfg.r,
                        master_seed: cfg.seed,
                    };
                    match run_cell(&g, cfg, method, partition.map(|(_, p, _)| p), k, params) {
                        Ok(cell) => {
                            let mut row = cell.into_row(&g, &dataset.name, method, k, params, cfg);
                            row.partition = partition.map(|(.., s)| *s);
                            report.rows.push(row);
                        }
                        Err(e) => report.failures.push(Failure {
                            dataset: dataset.name.clone(),
                            cell: Some((method, k, p)),
                            message: e.to_string(),
                        }),
                    }
                }
            }
        }
    }
    report
}

enum CellOutcome {
    Done {
        seeds: SeedSet,
        sigma: (f64, f64),
        runtime_s: Option<f64>,
    },
    TimedOut {
        runtime_s: Option<f64>,
    },
}

impl CellOutcome {
    fn into_row(
        self,
        g: &Graph,
        dataset: &str,
        method: Method,
        k: usize,
        params: DiffusionParams,
        cfg: &ExperimentConfig,
    ) -> ExperimentResult {
        let community = method.is_community_based();
        let mut row = ExperimentResult {
            dataset: dataset.to_owned(),
            method,
            k,
            p: params.p,
            r: params.r,
            theta: community.then_some(cfg.theta),
            alpha: (method == Method::AlphaHcim).then_some(cfg.alpha),
            sigma: None,
            runtime_s: None,
            timed_out: false,
            seeds: Vec::new(),
            spread_evaluations: 0,
            partition: None,
        };
        match self {
            CellOutcome::Done {
                seeds,
                sigma,
                runtime_s,
            } => {
                row.sigma = Some(sigma);
                row.runtime_s = runtime_s;
                row.seeds = seeds
                    .members
                    .iter()
                    .map(|&v| g.label(v).to_owned())
                    .collect();
                row.spread_evaluations = seeds.spread_evaluations;
            }
            CellOutcome::TimedOut { runtime_s } => {
                row.timed_out = true;
                row.runtime_s = runtime_s;
            }
        }
        row
    }
}

fn run_cell(
    g: &Graph,
    cfg: &ExperimentConfig,
    method: Method,
    partition: Option<&Partition>,
    k: usize,
    params: DiffusionParams,
) -> hcim::Result<CellOutcome> {
    let start = Instant::now();
    let deadline = match cfg.timeout {
        Some(secs) => Deadline::at(start + Duration::from_secs_f64(secs)),
        None => Deadline::none(),
    };
    let selected = match method {
        Method::Hcim | Method::AlphaHcim => {
            let partition = partition.expect("partition built for community methods");
            select_community_based_until(g, partition, k, params, cfg.theta, deadline).map(
                |(s, _)| s.with_method(method, (method == Method::AlphaHcim).then_some(cfg.alpha)),
            )
        }
        Method::Greedy => greedy_until(g, k, params, deadline),
        Method::Celf => celf_until(g, k, params, deadline),
    };
    let runtime_s = cfg.timing.then(|| start.elapsed().as_secs_f64());
    let seeds = match selected {
        Ok(s) => s,
        Err(Error::TimedOut) => return Ok(CellOutcome::TimedOut { runtime_s }),
        Err(e) => return Err(e),
    };
    let est = Estimator::new(
        g,
        params.with_seed(derive_seed(params.master_seed, REPORT_TAG)),
    )?;
    let sigma = est.estimate(&seeds.members);
    Ok(CellOutcome::Done {
        seeds,
        sigma: (sigma.mean, sigma.std_error),
        runtime_s,
    })
}
