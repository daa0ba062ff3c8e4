//! Writes an [`ExperimentReport`] to an output directory.
//!
//! Layout:
//!
//! * `results.csv`: one row per grid cell.
//! * `communities.csv`: partition statistics per (dataset, similarity).
//! * `plots/p_sweep_<dataset>_k<k>.dat`: σ̂ against p, one block per method.
//! * `plots/k_sweep_<dataset>_p<p>.dat`: σ̂ against k, only for k grids with
//!   more than one value.
//! * `failures.txt`: datasets or cells that could not be run, if any.
//!
//! Plot files separate method blocks with two blank lines, so gnuplot can
//! address them with `index`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::runner::{ExperimentReport, ExperimentResult};

pub const RESULTS_HEADER: [&str; 12] = [
    "dataset",
    "method",
    "k",
    "p",
    "r",
    "theta",
    "alpha",
    "sigma_mean",
    "sigma_se",
    "runtime_s",
    "timed_out",
    "seeds",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn result_record(row: &ExperimentResult) -> [String; 12] {
    [
        row.dataset.clone(),
        row.method.to_string(),
        row.k.to_string(),
        row.p.to_string(),
        row.r.to_string(),
        opt(row.theta),
        opt(row.alpha),
        opt(row.sigma.map(|s| s.0)),
        opt(row.sigma.map(|s| s.1)),
        opt(row.runtime_s),
        row.timed_out.to_string(),
        row.seeds.join(" "),
    ]
}

pub fn write_results<W: Write>(rows: &[ExperimentResult], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in rows {
        w.write_record(result_record(row))?;
    }
    w.flush()
}

pub fn write_partitions<W: Write>(report: &ExperimentReport, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset",
        "similarity",
        "alpha",
        "communities",
        "big_communities",
        "singletons",
        "modularity",
        "runtime_s",
    ])?;
    for s in &report.partitions {
        w.write_record([
            s.dataset.clone(),
            s.similarity.to_owned(),
            opt(s.alpha),
            s.communities.to_string(),
            s.big_communities.to_string(),
            s.singletons.to_string(),
            s.modularity.to_string(),
            opt(s.runtime_s),
        ])?;
    }
    w.flush()
}

/// Writes one series per method present in `rows`, in first-seen order.
/// Timed-out cells are left out.
fn write_series<W: Write>(
    rows: &[&ExperimentResult],
    header: &str,
    x: impl Fn(&ExperimentResult) -> String,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "# {header}")?;
    let mut methods = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for (i, m) in methods.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# method={m}")?;
        for r in rows.iter().filter(|r| r.method == *m) {
            if let Some((mean, _)) = r.sigma {
                writeln!(out, "{} {}", x(r), mean)?;
            }
        }
    }
    out.flush()
}

fn create(path: &Path) -> io::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes every output file and returns their paths, in creation order.
pub fn emit_results(report: &ExperimentReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut written = Vec::new();

    let path = dir.join("results.csv");
    write_results(&report.rows, create(&path)?)?;
    written.push(path);

    let path = dir.join("communities.csv");
    write_partitions(report, create(&path)?)?;
    written.push(path);

    let mut datasets = Vec::new();
    for r in &report.rows {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(r.dataset.as_str());
        }
    }
    for d in datasets {
        let rows: Vec<&ExperimentResult> = report.rows.iter().filter(|r| r.dataset == d).collect();
        let ks: BTreeSet<usize> = rows.iter().map(|r| r.k).collect();
        let mut ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup();

        for &k in &ks {
            let mut sub: Vec<&ExperimentResult> =
                rows.iter().copied().filter(|r| r.k == k).collect();
            sub.sort_by(|a, b| a.p.total_cmp(&b.p));
            let path = plots.join(format!("p_sweep_{d}_k{k}.dat"));
            write_series(
                &sub,
                &format!("dataset={d} k={k} x=p y=sigma_mean"),
                |r| r.p.to_string(),
                create(&path)?,
            )?;
            written.push(path);
        }
        if ks.len() > 1 {
            for &p in &ps {
                let mut sub: Vec<&ExperimentResult> =
                    rows.iter().copied().filter(|r| r.p == p).collect();
                sub.sort_by_key(|r| r.k);
                let path = plots.join(format!("k_sweep_{d}_p{p}.dat"));
                write_series(
                    &sub,
                    &format!("dataset={d} p={p} x=k y=sigma_mean"),
                    |r| r.k.to_string(),
                    create(&path)?,
                )?;
                written.push(path);
            }
        }
    }

    if !report.failures.is_empty() {
        let path = dir.join("failures.txt");
        let mut out = create(&path)?;
        for f in &report.failures {
            match f.cell {
                Some((m, k, p)) => writeln!(out, "{} {m} k={k} p={p}: {}", f.dataset, f.message)?,
                None => writeln!(out, "{}: {}", f.dataset, f.message)?,
            }
        }
        out.flush()?;
        written.push(path);
    }
    Ok(written)
}
