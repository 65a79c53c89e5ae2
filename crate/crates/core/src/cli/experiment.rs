//! Multi-trial experiments: every solver variant is run on `trials`
//! independent random streams and summarised by per-iteration quantile
//! bands and a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, AggregateRow};
use crate::linalg::{dist, DEFAULT_TOL_RANK};
use crate::problems::{self, CorruptionSpec, GeneratorSpec, NoiseLaw};
use crate::rng::trial_seed;
use crate::solvers::{ConvergenceTrace, LinearProblem, Method, Sampling, SolverConfig, SolverSetup};

pub const EXPERIMENT_SCHEMA: &str = "scrk-experiment/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemSource {
    Generate(GeneratorSpec),
    /// Bundle directory, relative paths resolved against the config file.
    Bundle(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub law: NoiseLaw,
    #[serde(default)]
    pub untrusted_only: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub method: Method,
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default)]
    pub sampling: Sampling,
    /// Defaults to `max(1, max_iters / 500)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    #[serde(default = "default_tol_rank")]
    pub tol_rank: f64,
}

fn default_tol_rank() -> f64 {
    DEFAULT_TOL_RANK
}

fn default_schema() -> String {
    EXPERIMENT_SCHEMA.into()
}

fn default_outputs() -> PathBuf {
    PathBuf::from("experiment-out")
}

fn default_row_set_tol() -> f64 {
    1e-3
}

pub fn default_record_every(max_iters: usize) -> usize {
    (max_iters / 500).max(1)
}

impl VariantConfig {
    pub fn solver_config(&self, seed: u64) -> Result<SolverConfig> {
        let q = match (self.method.is_quantile(), self.q) {
            (true, Some(q)) => q,
            (true, None) => {
                return Err(Error::InvalidConfig(format!("{} needs a quantile q", self.method)))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidConfig(format!("{} takes no quantile", self.method)))
            }
            (false, None) => 1.0,
        };
        let mut c = SolverConfig::quantile(self.method, q, self.max_iters)
            .seed(seed)
            .sampling(self.sampling)
            .record_every(self.record_every.unwrap_or_else(|| default_record_every(self.max_iters)))
            .tol_rank(self.tol_rank);
        c.stop_tol = self.stop_tol;
        c.validate()?;
        Ok(c)
    }

    /// Flop model per iteration: `4n` for a Kaczmarz step plus `4 r n` for
    /// applying the rank-`r` projector.
    pub fn flops_per_iteration(&self, n: usize, rank_i0: usize) -> f64 {
        let base = 4.0 * n as f64;
        if self.method.is_subspace() {
            base + 4.0 * (rank_i0 * n) as f64
        } else {
            base
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub problem: ProblemSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptionSpec>,
    /// Draw a fresh instance per trial (generator, noise and corruption
    /// seeds offset by the trial index) instead of sharing one.
    #[serde(default)]
    pub resample_per_trial: bool,
    pub solvers: Vec<VariantConfig>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    /// Residual threshold for counting a run as satisfying a named row set.
    #[serde(default = "default_row_set_tol")]
    pub row_set_tol: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return Err(Error::InvalidConfig(format!(
                "schema {:?}, expected {EXPERIMENT_SCHEMA:?}",
                self.schema
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig("no solver variants".into()));
        }
        if self.resample_per_trial && matches!(self.problem, ProblemSource::Bundle(_)) {
            return Err(Error::InvalidConfig("a bundle cannot be resampled per trial".into()));
        }
        for v in &self.solvers {
            v.solver_config(0)?;
        }
        Ok(())
    }

    /// Unique labels, defaulting to the method name.
    pub fn labels(&self) -> Vec<String> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        self.solvers
            .iter()
            .map(|v| {
                let base = v.label.clone().unwrap_or_else(|| v.method.name().to_string());
                let c = seen.entry(base.clone()).or_insert(0);
                *c += 1;
                if *c == 1 {
                    base
                } else {
                    format!("{base}-{c}")
                }
            })
            .collect()
    }

    /// The instance used by trial `t`.
    pub fn build_problem(&self, t: usize, base_dir: &Path) -> Result<LinearProblem> {
        let offset = if self.resample_per_trial { t as u64 } else { 0 };
        let mut p = match &self.problem {
            ProblemSource::Generate(spec) => {
                let mut spec = spec.clone();
                spec.seed = spec.seed.wrapping_add(offset);
                problems::generate(&spec)?
            }
            ProblemSource::Bundle(path) => io::load_problem(&base_dir.join(path))?,
        };
        if let Some(c) = &self.corruption {
            let c = CorruptionSpec {
                seed: c.seed.wrapping_add(offset),
                ..*c
            };
            p = problems::add_corruptions(&p, &c)?;
        }
        if let Some(nz) = &self.noise {
            p = problems::add_noise(&p, nz.law, nz.untrusted_only, nz.seed.wrapping_add(offset))?;
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

impl Band {
    fn of(mut v: Vec<f64>) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        v.sort_unstable_by(f64::total_cmp);
        Some(Self {
            median: io::empirical_quantile(&v, 0.5),
            q10: io::empirical_quantile(&v, 0.1),
            q90: io::empirical_quantile(&v, 0.9),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub label: String,
    pub method: Method,
    pub config: VariantConfig,
    pub trials_ok: usize,
    pub failures: Vec<TrialFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_rel_error: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_log10_rel_error: Option<Band>,
    /// Fraction of successful trials whose final iterate satisfies each
    /// named row set of the problem to `row_set_tol`.
    pub row_set_convergence: BTreeMap<String, f64>,
    pub median_iterations_run: f64,
    pub flops_per_iteration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub config: ExperimentConfig,
    pub m: usize,
    pub n: usize,
    pub m0: usize,
    pub variants: Vec<VariantSummary>,
}

impl Manifest {
    pub fn failed(&self) -> bool {
        self.variants.iter().any(|v| !v.failures.is_empty())
    }
}

/// Everything an experiment produced, before it is written out.
pub struct ExperimentOutcome {
    pub manifest: Manifest,
    pub aggregates: Vec<Option<Vec<AggregateRow>>>,
    /// `traces[variant][trial]`.
    pub traces: Vec<Vec<Result<ConvergenceTrace>>>,
    /// The trial-0 instance, used for row sets and reporting.
    pub problem: LinearProblem,
}

fn row_set_residual(p: &LinearProblem, rows: &[usize], x: &[f64]) -> f64 {
    let lhs = p.a.select_rows(rows).matvec(x).expect("dimensions agree");
    let rhs: Vec<f64> = rows.iter().map(|&r| p.b[r]).collect();
    dist(&lhs, &rhs)
}

/// Runs every trial of every variant. Trials run in parallel on the current
/// rayon pool; results do not depend on the pool size.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentOutcome> {
    config.validate()?;
    let labels = config.labels();
    let shared = config.build_problem(0, base_dir)?;
    let problems_per_trial: Option<Vec<LinearProblem>> = if config.resample_per_trial {
        Some(
            (0..config.trials)
                .into_par_iter()
                .map(|t| config.build_problem(t, base_dir))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let problem_of = |t: usize| -> &LinearProblem {
        problems_per_trial.as_ref().map_or(&shared, |v| &v[t])
    };

    let mut variants = Vec::new();
    let mut aggregates = Vec::new();
    let mut all_traces = Vec::new();
    for (v, label) in config.solvers.iter().zip(&labels) {
        let base_cfg = v.solver_config(0)?;
        let setup = if config.resample_per_trial {
            None
        } else {
            Some(SolverSetup::for_problem(&shared, &base_cfg)?)
        };
        let traces: Vec<Result<ConvergenceTrace>> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let cfg = v.solver_config(trial_seed(config.base_seed, t as u64))?;
                let p = problem_of(t);
                match &setup {
                    Some(s) => s.run(p, &cfg),
                    None => SolverSetup::for_problem(p, &cfg)?.run(p, &cfg),
                }
            })
            .collect();

        let mut failures = Vec::new();
        let mut ok = Vec::new();
        for (t, r) in traces.iter().enumerate() {
            match r {
                Ok(tr) => ok.push((t, tr)),
                Err(e) => failures.push(TrialFailure {
                    trial: t,
                    error: e.to_string(),
                }),
            }
        }
        let with_truth = ok.iter().all(|(_, tr)| tr.initial_error.is_some()) && !ok.is_empty();
        let agg = if with_truth {
            let owned: Vec<ConvergenceTrace> = ok.iter().map(|(_, tr)| (*tr).clone()).collect();
            Some(io::aggregate_relative_errors(&owned)?)
        } else {
            None
        };
        let finals: Vec<f64> = ok.iter().filter_map(|(_, tr)| tr.final_relative_error()).collect();
        let mut row_set_convergence = BTreeMap::new();
        for (name, rows) in &shared.metadata.row_sets {
            if name == "row_map" || ok.is_empty() {
                continue;
            }
            let hits = ok
                .iter()
                .filter(|(t, tr)| row_set_residual(problem_of(*t), rows, &tr.final_x) < config.row_set_tol)
                .count();
            row_set_convergence.insert(name.clone(), hits as f64 / ok.len() as f64);
        }
        let iters: Vec<f64> = ok.iter().map(|(_, tr)| tr.iterations_run as f64).collect();
        let rank_i0 = match &setup {
            Some(s) => s.projector().rank,
            None => SolverSetup::for_problem(&shared, &base_cfg)?.projector().rank,
        };
        variants.push(VariantSummary {
            label: label.clone(),
            method: v.method,
            config: v.clone(),
            trials_ok: ok.len(),
            failures,
            aggregate_csv: agg.as_ref().map(|_| format!("{label}.csv")),
            final_rel_error: Band::of(finals.clone()),
            final_log10_rel_error: Band::of(finals.iter().map(|e| e.log10()).collect()),
            row_set_convergence,
            median_iterations_run: Band::of(iters).map_or(0.0, |b| b.median),
            flops_per_iteration: v.flops_per_iteration(shared.n(), rank_i0),
        });
        aggregates.push(agg);
        all_traces.push(traces);
    }
    Ok(ExperimentOutcome {
        manifest: Manifest {
            schema: EXPERIMENT_SCHEMA.into(),
            config: config.clone(),
            m: shared.m(),
            n: shared.n(),
            m0: shared.i0.len(),
            variants,
        },
        aggregates,
        traces: all_traces,
        problem: shared,
    })
}

/// Writes `manifest.json` and one aggregate CSV per variant into `out`.
pub fn write_outcome(outcome: &ExperimentOutcome, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (v, agg) in outcome.manifest.variants.iter().zip(&outcome.aggregates) {
        if let (Some(name), Some(rows)) = (&v.aggregate_csv, agg) {
            io::write_aggregate_csv(rows, &out.join(name))?;
        }
    }
    io::write_json(&outcome.manifest, &out.join("manifest.json"))
}
