//! Kaczmarz-type iterations: plain randomized Kaczmarz (RK), the subspace
//! constrained variant (SCRK) whose iterates stay on the solution set of the
//! trusted rows `I0`, and the quantile-thresholded versions of both.
//!
//! A run is described by a [`LinearProblem`] and a [`SolverConfig`] and
//! produces a [`ConvergenceTrace`]. [`SolverSetup`] holds everything that
//! depends only on `(A, I0)` so repeated runs can share it.

mod engine;
mod sampling;
mod steps;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use engine::{run_solver, SolverSetup, DRIFT_INTERVAL, GRAM_MAX_ENTRIES};
pub(crate) use sampling::PrefixSampler;
pub use sampling::{quantile_rank, quantile_threshold, sample_row, uniform_variant_threshold};
pub use steps::{rejection_sampling_step, rk_step, scrk_step, two_step_block_update};

use crate::error::{Error, Result};
use crate::linalg::{dist, DenseMatrix, DEFAULT_TOL_RANK};

/// Named row sets, vectors and generator provenance carried with a problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub row_sets: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vectors: BTreeMap<String, Vec<f64>>,
}

/// `A x = b` with a trusted row set `I0`.
///
/// `b` is the measured right-hand side, so it already contains any noise or
/// corruption that was injected; `noise` and `corruption_support` record
/// what was added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub i0: Vec<usize>,
    pub corruption_support: Option<Vec<usize>>,
    pub noise: Option<Vec<f64>>,
    pub metadata: ProblemMetadata,
}

impl LinearProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, i0: Vec<usize>) -> Result<Self> {
        let p = Self {
            a,
            b,
            x_star: None,
            i0,
            corruption_support: None,
            noise: None,
            metadata: ProblemMetadata::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Consistent problem `b = A x*`.
    pub fn consistent(a: DenseMatrix, x_star: Vec<f64>, i0: Vec<usize>) -> Result<Self> {
        let b = a.matvec(&x_star)?;
        let mut p = Self::new(a, b, i0)?;
        p.x_star = Some(x_star);
        Ok(p)
    }

    pub fn with_x_star(mut self, x_star: Vec<f64>) -> Result<Self> {
        self.x_star = Some(x_star);
        self.validate()?;
        Ok(self)
    }

    pub fn with_i0(mut self, i0: Vec<usize>) -> Result<Self> {
        self.i0 = i0;
        self.validate()?;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Complement of `I0`, ascending.
    pub fn i1(&self) -> Vec<usize> {
        complement(&self.i0, self.m())
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.a.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidProblem("empty system matrix".into()));
        }
        if self.b.len() != m {
            return Err(Error::dims(format!("b has length {}, A has {m} rows", self.b.len())));
        }
        if let Some(x) = &self.x_star {
            if x.len() != n {
                return Err(Error::dims(format!("x* has length {}, A has {n} columns", x.len())));
            }
        }
        if let Some(r) = &self.noise {
            if r.len() != m {
                return Err(Error::dims(format!("noise has length {}, A has {m} rows", r.len())));
            }
        }
        check_index_set("i0", &self.i0, m)?;
        if let Some(c) = &self.corruption_support {
            check_index_set("corruption_support", c, m)?;
            if c.iter().any(|j| self.i0.binary_search(j).is_ok()) {
                return Err(Error::InvalidProblem(
                    "corruption support intersects the trusted rows".into(),
                ));
            }
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("b has non-finite entries".into()));
        }
        Ok(())
    }
}

fn check_index_set(name: &str, idx: &[usize], m: usize) -> Result<()> {
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidProblem(format!(
            "{name} must be strictly increasing"
        )));
    }
    if let Some(&last) = idx.last() {
        if last >= m {
            return Err(Error::InvalidProblem(format!(
                "{name} contains row {last} but the system has {m} rows"
            )));
        }
    }
    Ok(())
}

/// `[0, m) \ idx` for a sorted `idx`.
pub fn complement(idx: &[usize], m: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.saturating_sub(idx.len()));
    let mut it = idx.iter().peekable();
    for i in 0..m {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk,
    Scrk,
    QuantileRk,
    QuantileScrk,
}

impl Method {
    pub fn is_quantile(self) -> bool {
        matches!(self, Method::QuantileRk | Method::QuantileScrk)
    }

    /// Whether iterates are confined to the trusted solution space.
    pub fn is_subspace(self) -> bool {
        matches!(self, Method::Scrk | Method::QuantileScrk)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rk => "rk",
            Method::Scrk => "scrk",
            Method::QuantileRk => "quantile-rk",
            Method::QuantileScrk => "quantile-scrk",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Row selection law.
///
/// `ProjectedNorm` draws `j` with probability proportional to `‖P a_j‖²`
/// (`‖a_j‖²` for the RK family), restricted to the admissible set for the
/// quantile methods. `UniformWithRejection` draws uniformly; for the
/// quantile methods a draw is accepted only when its residual scaled by
/// `‖P a_j‖` is at most the quantile of the scaled residuals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    ProjectedNorm,
    UniformWithRejection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Quantile level, used by the quantile methods only.
    pub quantile_q: f64,
    pub sampling: Sampling,
    pub seed: u64,
    pub record_every: usize,
    /// Stop once `‖x - x*‖ / ‖x0 - x*‖` falls to this value (needs `x*`).
    pub stop_tol: Option<f64>,
    pub tol_rank: f64,
}

impl SolverConfig {
    pub fn new(method: Method, max_iters: usize) -> Self {
        Self {
            method,
            max_iters,
            quantile_q: 1.0,
            sampling: Sampling::ProjectedNorm,
            seed: 0,
            record_every: 1,
            stop_tol: None,
            tol_rank: DEFAULT_TOL_RANK,
        }
    }

    pub fn quantile(method: Method, q: f64, max_iters: usize) -> Self {
        Self {
            quantile_q: q,
            ..Self::new(method, max_iters)
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn stop_tol(mut self, tol: f64) -> Self {
        self.stop_tol = Some(tol);
        self
    }

    pub fn tol_rank(mut self, tol: f64) -> Self {
        self.tol_rank = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.quantile_q > 0.0 && self.quantile_q <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "quantile q = {} outside (0, 1]",
                self.quantile_q
            )));
        }
        if !(self.tol_rank >= 0.0 && self.tol_rank.is_finite()) {
            return Err(Error::InvalidConfig("tol_rank must be finite and >= 0".into()));
        }
        if let Some(t) = self.stop_tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidConfig("stop_tol must be >= 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// `‖x^k - x*‖` when the ground truth is known.
    pub error: Option<f64>,
    /// `‖A_I1 x^k - b_I1‖`.
    pub residual_norm: f64,
    pub gamma_q: Option<f64>,
    pub seconds: f64,
}

impl PartialEq for TraceRecord {
    // wall-clock time is not part of a run's outcome
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.error.map(f64::to_bits) == other.error.map(f64::to_bits)
            && self.residual_norm.to_bits() == other.residual_norm.to_bits()
            && self.gamma_q.map(f64::to_bits) == other.gamma_q.map(f64::to_bits)
    }
}

/// Recorded history of one run.
///
/// Equality compares every recorded value bit for bit and ignores the
/// wall-clock fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub method: Method,
    pub iterations: Vec<TraceRecord>,
    pub initial_error: Option<f64>,
    pub final_x: Vec<f64>,
    pub iterations_run: usize,
    pub stopped_early: bool,
    pub rng_seed_used: u64,
    pub rng: String,
    pub wall_time_seconds: f64,
}

impl PartialEq for ConvergenceTrace {
    fn eq(&self, other: &Self) -> bool {
        self.method == other.method
            && self.iterations == other.iterations
            && self.initial_error.map(f64::to_bits) == other.initial_error.map(f64::to_bits)
            && self.final_x.len() == other.final_x.len()
            && self
                .final_x
                .iter()
                .zip(&other.final_x)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.iterations_run == other.iterations_run
            && self.stopped_early == other.stopped_early
            && self.rng_seed_used == other.rng_seed_used
            && self.rng == other.rng
    }
}

impl ConvergenceTrace {
    /// `‖x^k - x*‖ / ‖x^0 - x*‖` per record.
    pub fn relative_errors(&self) -> Vec<Option<f64>> {
        self.iterations
            .iter()
            .map(|r| relative(r.error, self.initial_error))
            .collect()
    }

    pub fn final_relative_error(&self) -> Option<f64> {
        self.iterations
            .last()
            .and_then(|r| relative(r.error, self.initial_error))
    }

    pub fn final_record(&self) -> &TraceRecord {
        self.iterations.last().expect("a trace always records iteration 0")
    }

    /// Distance from the final iterate to a reference vector.
    pub fn final_distance_to(&self, reference: &[f64]) -> f64 {
        dist(&self.final_x, reference)
    }
}

fn relative(e: Option<f64>, e0: Option<f64>) -> Option<f64> {
    match (e, e0) {
        (Some(e), Some(e0)) if e0 > 0.0 => Some(e / e0),
        (Some(e), Some(_)) => Some(if e == 0.0 { 0.0 } else { f64::INFINITY }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_sorted_set() {
        assert_eq!(complement(&[0, 2], 3), vec![1]);
        assert_eq!(complement(&[], 2), vec![0, 1]);
    }

    #[test]
    fn validation_catches_bad_sets() {
        let a = DenseMatrix::identity(3);
        assert!(LinearProblem::new(a.clone(), vec![0.0; 3], vec![2, 1]).is_err());
        assert!(LinearProblem::new(a.clone(), vec![0.0; 3], vec![3]).is_err());
        assert!(LinearProblem::new(a.clone(), vec![0.0; 2], vec![]).is_err());
        let mut p = LinearProblem::new(a, vec![0.0; 3], vec![0]).unwrap();
        p.corruption_support = Some(vec![0]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(Method::Rk, 0).validate().is_err());
        assert!(SolverConfig::quantile(Method::QuantileRk, 0.0, 5).validate().is_err());
        assert!(SolverConfig::quantile(Method::QuantileRk, 1.0, 5).validate().is_ok());
    }
}
