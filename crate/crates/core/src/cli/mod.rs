//! The `scrk` command line: `generate`, `solve`, `experiment`, `analyze`.
//!
//! Exit codes: 0 on success, 1 when a command fails (IO, solver or analysis
//! preconditions, failed trials), 2 for invalid arguments. Data summaries go
//! to standard output, diagnostics to standard error.

pub mod experiment;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    corruption_bound, noisy_horizon, scrk_rate_bound, subset_max_frobenius, subset_min_singular,
    SubsetMode, SubsetSpectrum, DEFAULT_EXACT_MAX_SUBSETS,
};
use crate::error::Error;
use crate::io;
use crate::linalg::{build_projector, DEFAULT_TOL_RANK};
use crate::problems::{
    self, CorruptionSpec, Family, GeneratorSpec, MagnitudeLaw, NoiseLaw, OdePlacement, TrustedRows,
};
use crate::solvers::{LinearProblem, Method, Sampling, SolverConfig, SolverSetup};

pub use experiment::{run_experiment, write_outcome, ExperimentConfig, Manifest, VariantConfig};

#[derive(Debug, Parser)]
#[command(name = "scrk", version, about = "Subspace constrained randomized Kaczmarz toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem bundle.
    Generate(GenerateArgs),
    /// Run one solver on a bundle.
    Solve(SolveArgs),
    /// Run a multi-trial experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Spectral reports for a bundle.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    NormalizedGaussian,
    Uniform,
    CorrelatedMean,
    LowRankCoherent,
    Ode,
    Ct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TrustedArg {
    First,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of trusted rows (the construction size for correlated-mean).
    #[arg(long)]
    pub m0: Option<usize>,
    #[arg(long, value_enum, default_value_t = TrustedArg::First)]
    pub trusted: TrustedArg,
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Image side length for `ct`.
    #[arg(long = "N", visible_alias = "n-img")]
    pub n_img: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub angle_step: f64,
    #[arg(long)]
    pub rays: Option<usize>,
    /// Put the ODE initial conditions on x = 0..14 instead of spreading them.
    #[arg(long)]
    pub ode_leading_block: bool,
    /// Add uniform noise on [-a, a].
    #[arg(long, value_name = "A", conflicts_with = "noise_gaussian")]
    pub noise_uniform: Option<f64>,
    /// Add Gaussian noise with this standard deviation.
    #[arg(long, value_name = "S")]
    pub noise_gaussian: Option<f64>,
    #[arg(long)]
    pub noise_untrusted_only: bool,
    #[arg(long, default_value_t = 1)]
    pub noise_seed: u64,
    /// Number of corrupted untrusted rows.
    #[arg(long, default_value_t = 0)]
    pub corruptions: usize,
    /// Corruptions uniform on [lo, hi]; without it, uniform on [-1, 1].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub corruption_range: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub corruption_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk,
    Scrk,
    QuantileRk,
    QuantileScrk,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk => Method::Rk,
            MethodArg::Scrk => Method::Scrk,
            MethodArg::QuantileRk => Method::QuantileRk,
            MethodArg::QuantileScrk => Method::QuantileScrk,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    ProjectedNorm,
    UniformWithRejection,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub bundle: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the trusted rows stored in the sidecar (the default).
    #[arg(long, conflicts_with = "m0")]
    pub m0_from_sidecar: bool,
    /// Use the first `m0` rows as the trusted set instead.
    #[arg(long)]
    pub m0: Option<usize>,
    #[arg(long, value_enum, default_value_t = SamplingArg::ProjectedNorm)]
    pub sampling: SamplingArg,
    /// Defaults to max(1, iters / 500).
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL_RANK)]
    pub tol_rank: f64,
    /// Output directory; defaults to `<bundle>/results/<method>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; `SCRK_THREADS` is used when absent.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub bundle: PathBuf,
    #[arg(long)]
    pub rates: bool,
    #[arg(long)]
    pub horizon: bool,
    #[arg(long, requires_all = ["q", "beta"])]
    pub corruption_bound: bool,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub subset_alpha: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EXACT_MAX_SUBSETS)]
    pub exact_max_subsets: f64,
    /// Estimate subset minima from this many random subsets instead of
    /// enumerating (not certified).
    #[arg(long)]
    pub sampled_subsets: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub subset_seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL_RANK)]
    pub tol_rank: f64,
    /// Report file; defaults to `<bundle>/analysis.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, mapped to its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failed(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Failed(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Entry point of the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Analyze(a) => cmd_analyze(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("scrk: {e}");
            e.exit_code()
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> CliResult<T> {
    match v {
        Some(v) => Ok(v),
        None => usage(format!("--{flag} is required for --family {family}")),
    }
}

/// Translates generate flags into a generator spec.
pub fn generator_spec(a: &GenerateArgs) -> CliResult<GeneratorSpec> {
    let family = match a.family {
        FamilyArg::Gaussian => Family::GaussianRows,
        FamilyArg::NormalizedGaussian => Family::NormalizedGaussianRows,
        FamilyArg::Uniform => Family::UniformEntries {
            lo: need(a.lo, "lo", "uniform")?,
            hi: need(a.hi, "hi", "uniform")?,
        },
        FamilyArg::CorrelatedMean => Family::CorrelatedMean {
            m0: need(a.m0, "m0", "correlated-mean")?,
            epsilon: need(a.epsilon, "epsilon", "correlated-mean")?,
        },
        FamilyArg::LowRankCoherent => Family::LowRankCoherent {
            r: need(a.r, "r", "low-rank-coherent")?,
            epsilon: need(a.epsilon, "epsilon", "low-rank-coherent")?,
        },
        FamilyArg::Ode => Family::Toeplitz1m21WithConditions {
            placement: if a.ode_leading_block {
                OdePlacement::leading_block()
            } else {
                OdePlacement::default()
            },
        },
        FamilyArg::Ct => {
            let n_img = need(a.n_img, "N", "ct")?;
            Family::ParallelBeamPhantom {
                n_img,
                angle_step_deg: a.angle_step,
                n_rays: a.rays.unwrap_or(n_img),
            }
        }
    };
    let sized = !matches!(a.family, FamilyArg::Ode | FamilyArg::Ct);
    if sized && (a.m == 0 || a.n == 0) {
        return usage("--m and --n are required and must be positive");
    }
    let trusted = match (a.family, a.m0) {
        (FamilyArg::CorrelatedMean, _) | (_, None) => TrustedRows::FamilyDefault,
        (_, Some(k)) => match a.trusted {
            TrustedArg::First => TrustedRows::First(k),
            TrustedArg::Random => TrustedRows::Random(k),
        },
    };
    Ok(GeneratorSpec::new(family, a.m, a.n, a.seed).trusted(trusted))
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let spec = generator_spec(a)?;
    let mut p = problems::generate(&spec).map_err(|e| match e {
        Error::InvalidSpec(m) | Error::InvalidGeometry(m) => CliError::Usage(m),
        other => CliError::Failed(other),
    })?;
    let noise = match (a.noise_uniform, a.noise_gaussian) {
        (Some(v), _) => Some(NoiseLaw::UniformSymmetric(v)),
        (_, Some(s)) => Some(NoiseLaw::GaussianScale(s)),
        _ => None,
    };
    if a.corruptions > 0 {
        let magnitude = match a.corruption_range.as_deref() {
            Some([lo, hi]) => MagnitudeLaw::UniformRange(*lo, *hi),
            Some(_) => return usage("--corruption-range takes two values"),
            None => MagnitudeLaw::UniformSymmetric(1.0),
        };
        p = problems::add_corruptions(
            &p,
            &CorruptionSpec {
                count: a.corruptions,
                magnitude,
                seed: a.corruption_seed,
            },
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(law) = noise {
        p = problems::add_noise(&p, law, a.noise_untrusted_only, a.noise_seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    io::save_problem(&p, &a.out)?;
    println!(
        "wrote {}: {}x{} system, m0 = {}, corrupted rows = {}, noise = {}, family {:?}, seed {}",
        a.out.display(),
        p.m(),
        p.n(),
        p.i0.len(),
        p.corruption_support.as_ref().map_or(0, Vec::len),
        if p.noise.is_some() { "yes" } else { "no" },
        a.family,
        a.seed
    );
    Ok(())
}

#[derive(Serialize)]
struct SolveResult<'a> {
    schema: &'static str,
    bundle: String,
    config: &'a SolverConfig,
    m: usize,
    n: usize,
    m0: usize,
    iterations_run: usize,
    stopped_early: bool,
    records: usize,
    final_error: Option<f64>,
    final_rel_error: Option<f64>,
    final_residual_norm: f64,
    row_set_residuals: std::collections::BTreeMap<String, f64>,
    rng: &'a str,
    seed: u64,
    wall_time_seconds: f64,
    trace_csv: &'static str,
}

fn cmd_solve(a: &SolveArgs) -> CliResult<()> {
    let method: Method = a.method.into();
    let q = match (method.is_quantile(), a.q) {
        (true, Some(q)) => q,
        (true, None) => return usage(format!("--q is required for --method {method}")),
        (false, Some(_)) => return usage(format!("--q only applies to quantile methods, not {method}")),
        (false, None) => 1.0,
    };
    let mut problem = io::load_problem(&a.bundle)?;
    if let Some(k) = a.m0 {
        if k > problem.m() {
            return usage(format!("--m0 {k} exceeds the {} rows", problem.m()));
        }
        problem.i0 = (0..k).collect();
        problem.corruption_support = problem
            .corruption_support
            .map(|c| c.into_iter().filter(|&j| j >= k).collect());
    }
    let mut config = SolverConfig::quantile(method, q, a.iters)
        .seed(a.seed)
        .sampling(match a.sampling {
            SamplingArg::ProjectedNorm => Sampling::ProjectedNorm,
            SamplingArg::UniformWithRejection => Sampling::UniformWithRejection,
        })
        .record_every(a.record_every.unwrap_or_else(|| experiment::default_record_every(a.iters)))
        .tol_rank(a.tol_rank);
    config.stop_tol = a.stop_tol;
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }

    let setup = SolverSetup::for_problem(&problem, &config)?;
    let trace = setup.run(&problem, &config)?;

    let out = a
        .out
        .clone()
        .unwrap_or_else(|| a.bundle.join("results").join(method.name()));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    io::write_trace_csv(&trace, &out.join("trace.csv"))?;
    let row_set_residuals = problem
        .metadata
        .row_sets
        .iter()
        .filter(|(k, _)| k.as_str() != "row_map")
        .map(|(k, rows)| {
            let lhs = problem.a.select_rows(rows).matvec(&trace.final_x).expect("shapes agree");
            let rhs: Vec<f64> = rows.iter().map(|&r| problem.b[r]).collect();
            (k.clone(), crate::linalg::dist(&lhs, &rhs))
        })
        .collect();
    let result = SolveResult {
        schema: "scrk-result/1",
        bundle: a.bundle.display().to_string(),
        config: &config,
        m: problem.m(),
        n: problem.n(),
        m0: problem.i0.len(),
        iterations_run: trace.iterations_run,
        stopped_early: trace.stopped_early,
        records: trace.iterations.len(),
        final_error: trace.final_record().error,
        final_rel_error: trace.final_relative_error(),
        final_residual_norm: trace.final_record().residual_norm,
        row_set_residuals,
        rng: &trace.rng,
        seed: trace.rng_seed_used,
        wall_time_seconds: trace.wall_time_seconds,
        trace_csv: "trace.csv",
    };
    io::write_json(&result, &out.join("result.json"))?;
    match result.final_rel_error {
        Some(e) => println!(
            "{method}: {} iterations, final relative error {e:.3e}, residual {:.3e}",
            trace.iterations_run, result.final_residual_norm
        ),
        None => println!(
            "{method}: {} iterations, residual {:.3e}",
            trace.iterations_run, result.final_residual_norm
        ),
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(t) = flag {
        return if t == 0 { usage("--threads must be positive") } else { Ok(Some(t)) };
    }
    match std::env::var("SCRK_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => usage(format!("SCRK_THREADS={v:?} is not a positive integer")),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult<()> {
    let config: ExperimentConfig = io::read_json(&a.config)?;
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    let base_dir = a.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = a.out.clone().unwrap_or_else(|| base_dir.join(&config.outputs));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count(a.threads)? {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Failed(Error::InvalidConfig(e.to_string())))?;
    let outcome = pool.install(|| run_experiment(&config, &base_dir))?;
    write_outcome(&outcome, &out)?;
    for v in &outcome.manifest.variants {
        let med = v
            .final_log10_rel_error
            .map(|b| format!("median log10 rel error {:.2}", b.median))
            .unwrap_or_default();
        let sets: Vec<String> = v
            .row_set_convergence
            .iter()
            .map(|(k, f)| format!("{k} {:.0}%", 100.0 * f))
            .collect();
        println!(
            "{}: {}/{} trials ok {} {}",
            v.label,
            v.trials_ok,
            config.trials,
            med,
            sets.join(", ")
        );
    }
    if outcome.manifest.failed() {
        for v in &outcome.manifest.variants {
            for f in &v.failures {
                eprintln!("scrk: {} trial {}: {}", v.label, f.trial, f.error);
            }
        }
        return Err(CliError::Failed(Error::InvalidConfig(format!(
            "trial failures recorded in {}",
            out.join("manifest.json").display()
        ))));
    }
    Ok(())
}

#[derive(Default, Serialize)]
struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<crate::analysis::SpectralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<HorizonOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corruption_bound: Option<crate::analysis::CorruptionBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subsets: Option<SubsetOut>,
}

#[derive(Serialize)]
struct HorizonOut {
    #[serde(flatten)]
    report: crate::analysis::HorizonReport,
    horizon: f64,
}

#[derive(Serialize)]
struct SubsetOut {
    alpha: f64,
    sigma_min: SubsetSpectrum,
    z_alpha: f64,
}

/// Noise actually present in `b`: `b - A x*` when `x*` is known, else the
/// recorded noise.
fn noise_of(p: &LinearProblem) -> Option<Vec<f64>> {
    match (&p.x_star, &p.noise) {
        (Some(x), _) => {
            let ax = p.a.matvec(x).ok()?;
            let mut r: Vec<f64> = p.b.iter().zip(ax).map(|(b, v)| b - v).collect();
            if let Some(c) = &p.corruption_support {
                for &j in c {
                    r[j] = 0.0;
                }
            }
            Some(r)
        }
        (None, Some(r)) => Some(r.clone()),
        _ => None,
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<()> {
    let p = io::load_problem(&a.bundle)?;
    let mode = match a.sampled_subsets {
        Some(s) => SubsetMode::SampledLowerEstimate {
            samples: s,
            seed: a.subset_seed,
        },
        None => SubsetMode::Exact {
            max_subsets: a.exact_max_subsets,
        },
    };
    let any = a.rates || a.horizon || a.corruption_bound || a.subset_alpha.is_some();
    let mut report = AnalysisReport::default();
    if a.rates || !any {
        let r = scrk_rate_bound(&p.a, &p.i0, a.tol_rank)?;
        println!(
            "m = {}, n = {}, m0 = {} (rank {}): scrk rate {:.6e}, rk rate {:.6e}",
            r.m, r.n, r.m0, r.rank_i0, r.scrk_rate, r.rk_rate
        );
        println!(
            "  sigma_min+(A_I1 P)/||A_I1 P||_F = {:.3e}, sigma_min(A)/||A||_F = {:.3e}",
            r.sigma_min_plus_proj / r.frob_proj,
            r.sigma_min_full / r.frob_full
        );
        report.rates = Some(r);
    }
    if a.horizon {
        let r = noise_of(&p).ok_or_else(|| {
            CliError::Failed(Error::InvalidProblem("horizon needs x* or recorded noise".into()))
        })?;
        let h = noisy_horizon(&p.a, &p.i0, &r, a.tol_rank)?;
        println!("horizon gamma0 = {:.6e}, gamma1 = {:.6e}, total {:.6e}", h.gamma0, h.gamma1, h.horizon());
        report.horizon = Some(HorizonOut {
            horizon: h.horizon(),
            report: h,
        });
    }
    let pf = build_projector(&p.a.select_rows(&p.i0), a.tol_rank)?;
    if a.corruption_bound {
        let (q, beta) = (a.q.expect("required by clap"), a.beta.expect("required by clap"));
        let c = corruption_bound(&p.a, &p.i0, &pf, q, beta, mode)?;
        println!(
            "C_(q,beta) = {:.6e}: lhs {:.6e} vs rhs {:.6e}, guaranteed = {}{}",
            c.c_qb,
            c.condition_lhs,
            c.condition_rhs,
            c.converges_guaranteed,
            if c.certified { "" } else { " (sampled estimate)" }
        );
        report.corruption_bound = Some(c);
    }
    if let Some(alpha) = a.subset_alpha {
        let s = subset_min_singular(&p.a, &p.i0, &pf, alpha, mode)?;
        let z = subset_max_frobenius(&p.a, &p.i0, &pf, alpha)?;
        println!(
            "alpha = {alpha}: sigma_min+ over {} subsets of size {} = {:.6e}{}, Z = {:.6e}",
            s.subsets_evaluated,
            s.subset_size,
            s.value,
            if s.certified { "" } else { " (upper estimate)" },
            z
        );
        report.subsets = Some(SubsetOut {
            alpha,
            sigma_min: s,
            z_alpha: z,
        });
    }
    let out = a.out.clone().unwrap_or_else(|| a.bundle.join("analysis.json"));
    io::write_json(&report, &out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "scrk", "generate", "--family", "ct", "--N", "50", "--angle-step", "2", "--rays", "50", "--out", "p/",
        ])
        .unwrap();
        let Command::Generate(g) = cli.command else { panic!() };
        let spec = generator_spec(&g).unwrap();
        assert_eq!(
            spec.family,
            Family::ParallelBeamPhantom {
                n_img: 50,
                angle_step_deg: 2.0,
                n_rays: 50
            }
        );
        let cli = Cli::try_parse_from([
            "scrk", "generate", "--family", "uniform", "--lo", "0.9", "--hi", "1.1", "--m", "20", "--n", "10",
            "--m0", "3", "--trusted", "random", "--out", "p/",
        ])
        .unwrap();
        let Command::Generate(g) = cli.command else { panic!() };
        assert_eq!(generator_spec(&g).unwrap().trusted, TrustedRows::Random(3));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["scrk", "generate", "--family", "nope", "--out", "x"]), 2);
        assert_eq!(run(["scrk", "solve"]), 2);
        assert_eq!(run(["scrk", "analyze", "x", "--corruption-bound"]), 2);
        assert_eq!(run(["scrk", "--help"]), 0);
    }

    #[test]
    fn negative_ranges_parse() {
        let cli = Cli::try_parse_from([
            "scrk", "generate", "--family", "uniform", "--m", "4", "--n", "2", "--lo", "-1", "--hi", "-0.5",
            "--corruptions", "1", "--corruption-range", "-6", "-2", "--out", "x",
        ])
        .unwrap();
        let Command::Generate(g) = cli.command else { panic!() };
        assert_eq!((g.lo, g.hi), (Some(-1.0), Some(-0.5)));
        assert_eq!(g.corruption_range, Some(vec![-6.0, -2.0]));
    }
}
