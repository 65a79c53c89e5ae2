use std::path::Path;
use std::process::{Command, Output};

use scrk::cli::experiment::{ExperimentConfig, ProblemSource, VariantConfig, EXPERIMENT_SCHEMA};
use scrk::io::{load_problem, read_json, save_problem, write_json};
use scrk::problems::{Family, GeneratorSpec, TrustedRows};
use scrk::solvers::Sampling;
use scrk::{DenseMatrix, LinearProblem, Method};
use serde_json::Value;

fn scrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scrk"))
        .args(args)
        .env_remove("SCRK_THREADS")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_solve_writes_trace_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("p");
    let out = scrk(&[
        "generate", "--family", "normalized-gaussian", "--m", "60", "--n", "20", "--seed", "3",
        "--m0", "5", "--trusted", "random", "--out", path(&bundle),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = load_problem(&bundle).unwrap();
    assert_eq!((p.m(), p.n(), p.i0.len()), (60, 20, 5));

    let res = bundle.join("res");
    let out = scrk(&[
        "solve", path(&bundle), "--method", "scrk", "--iters", "3000", "--seed", "1", "--m0-from-sidecar",
        "--record-every", "100", "--out", path(&res),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(res.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 31);
    let result: Value = read_json(&res.join("result.json")).unwrap();
    assert_eq!(result["schema"], "scrk-result/1");
    assert_eq!(result["iterations_run"], 3000);
}

#[test]
fn solve_is_reproducible_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("p");
    assert!(scrk(&["generate", "--family", "gaussian", "--m", "30", "--n", "10", "--seed", "9", "--out", path(&bundle)])
        .status
        .success());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = scrk(&["solve", path(&bundle), "--method", "rk", "--iters", "500", "--seed", "4", "--out", path(&out)]);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("trace.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn analyze_identity_rates() {
    let dir = tempfile::tempdir().unwrap();
    let p = LinearProblem::consistent(DenseMatrix::identity(10), vec![1.0; 10], vec![]).unwrap();
    save_problem(&p, dir.path()).unwrap();
    let out = scrk(&["analyze", path(dir.path()), "--rates"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = read_json(&dir.path().join("analysis.json")).unwrap();
    let scrk_rate = report["rates"]["scrk_rate"].as_f64().unwrap();
    let rk_rate = report["rates"]["rk_rate"].as_f64().unwrap();
    assert!((scrk_rate - 0.9).abs() < 1e-12 && (rk_rate - 0.9).abs() < 1e-12);
}

#[test]
fn analyze_rejects_beta_not_below_q() {
    let dir = tempfile::tempdir().unwrap();
    let p = LinearProblem::consistent(DenseMatrix::identity(6), vec![1.0; 6], vec![0]).unwrap();
    save_problem(&p, dir.path()).unwrap();
    let out = scrk(&["analyze", path(dir.path()), "--corruption-bound", "--q", "0.3", "--beta", "0.4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(scrk(&[]).status.code(), Some(2));
    assert_eq!(scrk(&["generate", "--family", "gaussian"]).status.code(), Some(2));
    assert_eq!(scrk(&["solve", "nowhere", "--method", "quantile-rk"]).status.code(), Some(2));
    assert_eq!(scrk(&["--version"]).status.code(), Some(0));
}

#[test]
fn missing_bundle_exits_1() {
    let out = scrk(&["solve", "/nonexistent/bundle", "--method", "rk"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_writes_manifest_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let variant = |method, q: Option<f64>| VariantConfig {
        label: None,
        method,
        max_iters: 800,
        q,
        sampling: Sampling::default(),
        record_every: Some(40),
        stop_tol: None,
        tol_rank: 1e-10,
    };
    let config = ExperimentConfig {
        schema: EXPERIMENT_SCHEMA.into(),
        problem: ProblemSource::Generate(
            GeneratorSpec::new(Family::NormalizedGaussianRows, 80, 20, 2).trusted(TrustedRows::Random(6)),
        ),
        noise: None,
        corruption: None,
        resample_per_trial: false,
        solvers: vec![variant(Method::Rk, None), variant(Method::Scrk, None), variant(Method::QuantileScrk, Some(0.9))],
        trials: 4,
        base_seed: 11,
        outputs: "out".into(),
        row_set_tol: 1e-3,
    };
    let cfg_path = dir.path().join("exp.json");
    write_json(&config, &cfg_path).unwrap();
    let out = scrk(&["experiment", path(&cfg_path), "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = read_json(&dir.path().join("out").join("manifest.json")).unwrap();
    let variants = manifest["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 3);
    for v in variants {
        assert_eq!(v["trials_ok"], 4);
        let csv = dir.path().join("out").join(v["aggregate_csv"].as_str().unwrap());
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 21);
    }
}
