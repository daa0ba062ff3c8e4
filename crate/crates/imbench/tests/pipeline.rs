use std::fs;
use std::path::Path;
use std::process::Command;

use hcim::seedsel::Method;
use imbench::config::{ExperimentConfig, RawConfig};
use imbench::emit::RESULTS_HEADER;
use imbench::{emit_results, run_experiment};

fn karate_config(methods: &[&str], k: Vec<usize>, p: Vec<f64>) -> RawConfig {
    RawConfig {
        datasets: Some(vec!["karate".into()]),
        methods: Some(methods.iter().map(|m| m.to_string()).collect()),
        k: Some(k),
        p: Some(p),
        r: Some(50),
        seed: Some(3),
        timing: Some(false),
        ..Default::default()
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        RESULTS_HEADER
    );
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn grid_row_count_and_order() {
    let raw = karate_config(&["celf", "hcim"], vec![2, 3], vec![0.1, 0.3, 0.5]);
    let cfg = ExperimentConfig::try_from(raw).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 3);
    let keys: Vec<(Method, usize, f64)> =
        report.rows.iter().map(|r| (r.method, r.k, r.p)).collect();
    assert_eq!(keys[0], (Method::Celf, 2, 0.1));
    assert_eq!(keys[3], (Method::Celf, 3, 0.1));
    assert_eq!(keys[6], (Method::Hcim, 2, 0.1));
    // one partition, reused by every hcim cell
    assert_eq!(report.partitions.len(), 1);
    for r in &report.rows {
        assert_eq!(r.seeds.len(), r.k);
        assert!(!r.timed_out);
        assert_eq!(r.partition.is_some(), r.method == Method::Hcim);
    }
}

#[test]
fn missing_dataset_does_not_stop_other_cells() {
    let mut raw = karate_config(&["greedy"], vec![2], vec![0.2]);
    raw.datasets = Some(vec!["karate".into(), "/nonexistent/graph.txt".into()]);
    let cfg = ExperimentConfig::try_from(raw).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].dataset, "graph");
}

#[test]
fn timed_out_cells_have_empty_sigma() {
    let mut raw = karate_config(&["greedy", "alpha-hcim"], vec![5], vec![0.1]);
    raw.timeout = Some(1e-9);
    let cfg = ExperimentConfig::try_from(raw).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(report.rows.iter().all(|r| r.timed_out && r.sigma.is_none()));

    let dir = tempfile::tempdir().unwrap();
    emit_results(&report, dir.path()).unwrap();
    for row in csv_rows(&dir.path().join("results.csv")) {
        assert_eq!(row[10], "true");
        assert_eq!(row[7], "");
        assert_eq!(row[8], "");
        assert_eq!(row[11], "");
    }
}

#[test]
fn p_sweep_writes_one_plot_file() {
    let ps: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let cfg = ExperimentConfig::try_from(karate_config(&["alpha-hcim"], vec![4], ps)).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 9);
    let dir = tempfile::tempdir().unwrap();
    emit_results(&report, dir.path()).unwrap();

    assert_eq!(csv_rows(&dir.path().join("results.csv")).len(), 9);
    let plots: Vec<_> = fs::read_dir(dir.path().join("plots")).unwrap().collect();
    assert_eq!(plots.len(), 1);
    let text = fs::read_to_string(dir.path().join("plots/p_sweep_karate_k4.dat")).unwrap();
    let points: Vec<&str> = text
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    assert_eq!(points.len(), 9);
    assert!(points[0].starts_with("0.1 "));
    assert!(text.contains("# method=alpha-hcim"));
}

#[test]
fn k_sweep_files_when_k_varies() {
    let cfg = ExperimentConfig::try_from(karate_config(
        &["greedy", "celf"],
        vec![1, 2, 3],
        vec![0.1, 0.2],
    ))
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_results(&report, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"k_sweep_karate_p0.1.dat".to_string()));
    assert!(names.contains(&"p_sweep_karate_k3.dat".to_string()));
    let text = fs::read_to_string(dir.path().join("plots/k_sweep_karate_p0.2.dat")).unwrap();
    assert_eq!(text.matches("# method=").count(), 2);
    assert!(text.contains("\n\n\n# method=celf"));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let mut raw = karate_config(
            &["hcim", "alpha-hcim", "greedy", "celf"],
            vec![3],
            vec![0.2, 0.6],
        );
        raw.out = Some(dir.path().join(format!("run{run}")));
        let cfg = ExperimentConfig::try_from(raw).unwrap();
        let report = run_experiment(&cfg).unwrap();
        emit_results(&report, &cfg.out).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = [
            "results.csv",
            "communities.csv",
            "plots/p_sweep_karate_k3.dat",
        ]
        .iter()
        .map(|f| (f.to_string(), fs::read(cfg.out.join(f)).unwrap()))
        .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let cfg = ExperimentConfig::try_from(karate_config(&["greedy"], vec![1], vec![0.1])).unwrap();
    let report = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert!(emit_results(&report, &blocker.join("out")).is_err());
}

fn imbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_imbench"))
}

fn karate_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.txt")
}

#[test]
fn cli_run_with_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        format!(
            "datasets = [{:?}]\nmethods = [\"greedy\"]\nk = [2]\np = [0.1]\nr = 20\nout = {:?}\ntiming = false\n",
            karate_path().display().to_string(),
            dir.path().join("out").display().to_string()
        ),
    )
    .unwrap();
    let status = imbench()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--method", "celf", "--k", "1,2"])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let rows = csv_rows(&dir.path().join("out/results.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r[1] == "celf" && r[4] == "20" && r[0] == "karate"));
}

#[test]
fn cli_rejects_empty_method_list() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "datasets = [\"karate\"]\nmethods = []\nk = [1]\np = [0.1]\n",
    )
    .unwrap();
    let out = imbench()
        .args(["run", "--out"])
        .arg(dir.path().join("out"))
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one method"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn cli_score_and_communities() {
    let out = imbench()
        .args(["score", "--theta", "2", "--graph"])
        .arg(karate_path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 34);
    assert!(text.lines().all(|l| l.split(' ').count() == 2));

    let out = imbench()
        .args(["communities", "--similarity", "2s", "--graph"])
        .arg(karate_path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# communities="));
    assert!(text.contains("modularity="));
    assert_eq!(text.lines().count(), 35);
}

#[test]
fn cli_spread_trace() {
    let out = imbench()
        .args(["spread", "--seeds", "1", "--p", "1", "--trace", "--graph"])
        .arg(karate_path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // p = 1 activates the whole connected graph: 33 activations then the estimate
    assert_eq!(text.lines().count(), 34);
    assert!(text.trim_end().ends_with("r=100"));
    assert!(text.contains("sigma=34 "));
}
