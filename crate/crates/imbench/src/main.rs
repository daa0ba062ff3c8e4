use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hcim::community::agglomerate;
use hcim::diffusion::{simulate_traced, Estimator};
use hcim::graph::load_edge_list_with_report;
use hcim::rng::Stream;
use hcim::{
    modularity, DiffusionParams, Graph, NodeSet, PropagatorScores, ScoreConfig, SimilaritySpec,
    StoppingRule,
};
use imbench::runner::describe_load;
use imbench::{emit_results, run_experiment, ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(
    name = "imbench",
    version,
    about = "Community-based influence maximization benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write result files.
    Run(Box<RunArgs>),
    /// Print the propagator score of every vertex.
    Score {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        theta: usize,
    },
    /// Detect communities and print the partition with its modularity.
    Communities {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Similarity::Alpha2s)]
        similarity: Similarity,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Cut at this many communities instead of the modularity peak.
        #[arg(long)]
        communities: Option<usize>,
    },
    /// Estimate the spread of a seed set, optionally tracing one cascade.
    Spread {
        #[arg(long)]
        graph: PathBuf,
        /// Seed vertex labels.
        #[arg(long, required = true, num_args = 1..)]
        seeds: Vec<String>,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the activations of replication 0 as "round activator target" lines.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Similarity {
    #[value(name = "2s")]
    TwoS,
    #[value(name = "alpha2s")]
    Alpha2s,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset path or registry name; repeatable.
    #[arg(long)]
    graph: Vec<String>,
    /// One of hcim, alpha-hcim, greedy, celf; repeatable.
    #[arg(long)]
    method: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-cell time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    communities: Option<usize>,
    /// Leave runtime columns empty so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl RunArgs {
    fn overrides(self) -> RawConfig {
        let non_empty = |v: Vec<_>| (!v.is_empty()).then_some(v);
        RawConfig {
            datasets: non_empty(self.graph),
            data_dir: self.data_dir,
            methods: non_empty(self.method),
            k: (!self.k.is_empty()).then_some(self.k),
            p: (!self.p.is_empty()).then_some(self.p),
            r: self.r,
            theta: self.theta,
            alpha: self.alpha,
            seed: self.seed,
            timeout: self.timeout,
            out: self.out,
            workers: self.workers,
            communities: self.communities,
            timing: self.no_timing.then_some(false),
        }
    }
}

fn load(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let (g, report) = load_edge_list_with_report(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", path.display()))?;
    if let Some(w) = describe_load(&path.display().to_string(), &report) {
        eprintln!("warning: {w}");
    }
    Ok(g)
}

fn run(args: RunArgs) -> Result<()> {
    let base = match &args.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let cfg = ExperimentConfig::try_from(base.overridden_by(args.overrides()))?;
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.failures {
        match f.cell {
            Some((m, k, p)) => eprintln!("warning: {} {m} k={k} p={p}: {}", f.dataset, f.message),
            None => eprintln!("warning: {}: {}", f.dataset, f.message),
        }
    }
    let files = emit_results(&report, &cfg.out)
        .with_context(|| format!("cannot write results to {}", cfg.out.display()))?;
    for f in files {
        println!("{}", f.display());
    }
    if report.rows.is_empty() {
        bail!("no cell produced a result");
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Run(args) => {
            drop(out);
            return run(*args);
        }
        Command::Score { graph, theta } => {
            let g = load(&graph)?;
            let scores = PropagatorScores::new(&g, ScoreConfig { theta });
            for v in 0..g.node_count() {
                writeln!(out, "{} {}", g.label(v), scores.score(v)?)?;
            }
        }
        Command::Communities {
            graph,
            similarity,
            alpha,
            communities,
        } => {
            let g = load(&graph)?;
            let spec = match similarity {
                Similarity::TwoS => SimilaritySpec::two_s(),
                Similarity::Alpha2s => SimilaritySpec::alpha_two_s(alpha)?,
            };
            let stop =
                communities.map_or(StoppingRule::ModularityPeak, StoppingRule::CommunityCount);
            let partition = agglomerate(&g, spec)?.cut(stop);
            writeln!(
                out,
                "# communities={} modularity={:.6}",
                partition.len(),
                modularity(&g, &partition)?
            )?;
            partition.write(&g, &mut out)?;
        }
        Command::Spread {
            graph,
            seeds,
            p,
            r,
            seed,
            trace,
        } => {
            let g = load(&graph)?;
            let ids: NodeSet = seeds
                .iter()
                .map(|l| g.id_of(l).with_context(|| format!("unknown vertex {l}")))
                .collect::<Result<_>>()?;
            let params = DiffusionParams::new(p, r, seed)?;
            if trace {
                simulate_traced(&g, &ids, p, &Stream::new(seed, 0), &mut out)?;
            }
            let est = Estimator::new(&g, params)?.estimate(ids.as_slice());
            writeln!(out, "sigma={} se={} r={}", est.mean, est.std_error, est.r)?;
        }
    }
    out.flush()?;
    Ok(())
}
