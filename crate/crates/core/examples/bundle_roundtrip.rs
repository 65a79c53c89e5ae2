//! Generate a problem, save it as a bundle, load it back and run a small
//! multi-trial experiment on it. Output goes to the given directory
//! (default `bundle-out`).
//!
//! cargo run --release --example bundle_roundtrip -- bundle-out

use std::path::PathBuf;

use scrk::cli::experiment::{run_experiment, write_outcome, ExperimentConfig, ProblemSource, VariantConfig, EXPERIMENT_SCHEMA};
use scrk::io::{load_problem, save_problem};
use scrk::problems::{generate, Family, GeneratorSpec};
use scrk::{Method, Sampling};

fn main() -> scrk::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bundle-out".into()));
    let spec = GeneratorSpec::new(Family::CorrelatedMean { m0: 10, epsilon: 0.05 }, 60, 60, 4);
    let p = generate(&spec)?;
    let bundle = out.join("problem");
    save_problem(&p, &bundle)?;
    assert_eq!(load_problem(&bundle)?, p);
    println!("saved and reloaded {}x{} bundle in {}", p.m(), p.n(), bundle.display());

    let variant = |method| VariantConfig {
        label: None,
        method,
        max_iters: 5_000,
        q: None,
        sampling: Sampling::default(),
        record_every: Some(50),
        stop_tol: None,
        tol_rank: 1e-10,
    };
    let config = ExperimentConfig {
        schema: EXPERIMENT_SCHEMA.into(),
        problem: ProblemSource::Bundle(bundle),
        noise: None,
        corruption: None,
        resample_per_trial: false,
        solvers: vec![variant(Method::Rk), variant(Method::Scrk)],
        trials: 20,
        base_seed: 1,
        outputs: out.join("results"),
        row_set_tol: 1e-3,
    };
    let outcome = run_experiment(&config, &out)?;
    write_outcome(&outcome, &config.outputs)?;
    for v in &outcome.manifest.variants {
        if let Some(b) = v.final_log10_rel_error {
            println!("{}: median log10 rel error {:.2} [{:.2}, {:.2}]", v.label, b.median, b.q10, b.q90);
        }
    }
    Ok(())
}
