use std::hash::{Hash, Hasher};
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;

use super::sampling::{kth_smallest, quantile_rank, PrefixSampler};
use super::{complement, ConvergenceTrace, LinearProblem, Method, Sampling, SolverConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::linalg::{axpy, build_projector, dist, dot, norm_sq, pseudoinverse, DenseMatrix, ProjectorFactorization};
use crate::rng;

/// Iterations between re-projections onto the trusted solution space (and
/// exact recomputation of maintained residuals).
pub const DRIFT_INTERVAL: usize = 1000;

/// Largest row-Gram matrix (entries) kept for incremental residual updates.
pub const GRAM_MAX_ENTRIES: usize = 16_000_000;

/// Precomputed state for one `(A, I0)` pair and method family.
///
/// Holds the projector, the pseudoinverse that gives the starting iterate,
/// the step directions `P a_j` of the sampled rows and their weights. It
/// does not depend on `b`, so trials that only redraw the right-hand side
/// (noise, corruptions) can share one setup.
#[derive(Debug)]
pub struct SolverSetup {
    subspace: bool,
    shape: (usize, usize),
    fingerprint: u64,
    tol_rank: f64,
    i0: Vec<usize>,
    i1: Vec<usize>,
    pf: ProjectorFactorization,
    a_i0_pinv: Option<DenseMatrix>,
    rows: Vec<usize>,
    a_act: DenseMatrix,
    dirs: DenseMatrix,
    weights: Vec<f64>,
    dir_norms: Vec<f64>,
    pool: Vec<usize>,
    sampler: Option<PrefixSampler>,
    gram: OnceLock<Option<Vec<f64>>>,
}

fn fingerprint(a: &DenseMatrix) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    a.shape().hash(&mut h);
    for v in a.as_slice() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

impl SolverSetup {
    /// Setup for the family of `method` (RK-type or subspace constrained).
    ///
    /// The RK family samples all rows with `P = I`; the subspace family
    /// samples `I1` along `P a_j`. Rows with `‖P a_j‖ <= tol_rank ‖a_j‖` get
    /// weight zero.
    pub fn new(a: &DenseMatrix, i0: &[usize], method: Method, tol_rank: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if i0.windows(2).any(|w| w[0] >= w[1]) || i0.last().is_some_and(|&l| l >= m) {
            return Err(Error::InvalidProblem("i0 must be sorted and in range".into()));
        }
        let subspace = method.is_subspace();
        let i1 = complement(i0, m);
        let (pf, a_i0_pinv, rows) = if subspace {
            let a_i0 = a.select_rows(i0);
            let pf = build_projector(&a_i0, tol_rank)?;
            let pinv = pseudoinverse(&a_i0, tol_rank)?;
            (pf, Some(pinv), i1.clone())
        } else {
            (ProjectorFactorization::identity(n, tol_rank), None, (0..m).collect())
        };
        let a_act = a.select_rows(&rows);
        let dirs = pf.project_rows(&a_act)?;
        let mut weights = Vec::with_capacity(rows.len());
        let mut pool = Vec::new();
        for (local, d) in dirs.row_iter().enumerate() {
            let w = norm_sq(d);
            let degenerate = w == 0.0 || w.sqrt() <= tol_rank * norm_sq(a_act.row(local)).sqrt();
            if degenerate {
                weights.push(0.0);
            } else {
                weights.push(w);
                pool.push(local);
            }
        }
        let dir_norms = weights.iter().map(|w| w.sqrt()).collect();
        let sampler = PrefixSampler::new(&weights).ok();
        Ok(Self {
            subspace,
            shape: (m, n),
            fingerprint: fingerprint(a),
            tol_rank,
            i0: i0.to_vec(),
            i1,
            pf,
            a_i0_pinv,
            rows,
            a_act,
            dirs,
            weights,
            dir_norms,
            pool,
            sampler,
            gram: OnceLock::new(),
        })
    }

    pub fn for_problem(problem: &LinearProblem, config: &SolverConfig) -> Result<Self> {
        Self::new(&problem.a, &problem.i0, config.method, config.tol_rank)
    }

    pub fn projector(&self) -> &ProjectorFactorization {
        &self.pf
    }

    /// Indices of the rows the method samples from.
    pub fn sampled_rows(&self) -> &[usize] {
        &self.rows
    }

    /// Sampling weights `‖P a_j‖²` (zero for degenerate rows), aligned with
    /// [`Self::sampled_rows`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `A_I0† b_I0` for the subspace family, zero otherwise.
    pub fn initial_iterate(&self, b: &[f64]) -> Vec<f64> {
        let n = self.shape.1;
        match &self.a_i0_pinv {
            Some(pinv) if !self.i0.is_empty() => {
                let b0: Vec<f64> = self.i0.iter().map(|&i| b[i]).collect();
                // `+ 0.0` turns a signed zero into +0
                pinv.matvec(&b0)
                    .expect("pseudoinverse shape matches I0")
                    .into_iter()
                    .map(|v| v + 0.0)
                    .collect()
            }
            _ => vec![0.0; n],
        }
    }

    // Dᵢᵀ Dⱼ for the sampled rows; equals a_iᵀ D_j because P is an
    // orthogonal projector.
    fn gram(&self) -> Option<&[f64]> {
        self.gram
            .get_or_init(|| {
                let m = self.rows.len();
                if m.checked_mul(m).is_none_or(|e| e > GRAM_MAX_ENTRIES) {
                    return None;
                }
                let mut g = vec![0.0; m * m];
                for i in 0..m {
                    let di = self.dirs.row(i);
                    for j in i..m {
                        let v = dot(di, self.dirs.row(j));
                        g[i * m + j] = v;
                        g[j * m + i] = v;
                    }
                }
                Some(g)
            })
            .as_deref()
    }

    fn check_compatible(&self, problem: &LinearProblem, config: &SolverConfig) -> Result<()> {
        if config.method.is_subspace() != self.subspace {
            return Err(Error::InvalidConfig(format!(
                "setup built for the {} family cannot run {}",
                if self.subspace { "subspace" } else { "RK" },
                config.method
            )));
        }
        if config.tol_rank != self.tol_rank {
            return Err(Error::InvalidConfig("tol_rank differs from the setup".into()));
        }
        if problem.a.shape() != self.shape
            || problem.i0 != self.i0
            || fingerprint(&problem.a) != self.fingerprint
        {
            return Err(Error::InvalidProblem(
                "problem matrix or trusted set differs from the setup".into(),
            ));
        }
        Ok(())
    }

    /// Runs one solve. The trace records iteration 0, every
    /// `record_every`-th iteration and the last one.
    pub fn run(&self, problem: &LinearProblem, config: &SolverConfig) -> Result<ConvergenceTrace> {
        config.validate()?;
        problem.validate()?;
        self.check_compatible(problem, config)?;

        let start = Instant::now();
        let mut rng = rng::stream(config.seed);
        let m_act = self.rows.len();
        let b_act: Vec<f64> = self.rows.iter().map(|&i| problem.b[i]).collect();
        let x0 = self.initial_iterate(&problem.b);
        let mut x = x0.clone();
        let x_star = problem.x_star.as_deref();
        let initial_error = x_star.map(|xs| dist(&x0, xs));
        let stop_at = match (config.stop_tol, initial_error) {
            (Some(t), Some(e0)) => Some(t * e0),
            _ => None,
        };

        let quantile = config.method.is_quantile();
        let uniform = config.sampling == Sampling::UniformWithRejection;
        if self.pool.is_empty() {
            return Err(if quantile {
                Error::NoAdmissibleRow { iteration: 1 }
            } else {
                Error::AllZeroWeights
            });
        }
        let gram = if quantile { self.gram() } else { None };
        let q_rank = quantile_rank(config.quantile_q, m_act);
        let pool_rank = quantile_rank(config.quantile_q, self.pool.len());

        let mut resid = vec![0.0; if quantile { m_act } else { 0 }];
        let mut scratch = vec![0.0; if quantile { m_act } else { 0 }];
        if quantile {
            self.residuals_into(&b_act, &x, &mut resid);
        }

        let threshold = |resid: &[f64], scratch: &mut Vec<f64>| -> f64 {
            scratch.clear();
            if uniform {
                scratch.extend(self.pool.iter().map(|&i| resid[i].abs() / self.dir_norms[i]));
                kth_smallest(scratch, pool_rank)
            } else {
                scratch.extend(resid.iter().map(|r| r.abs()));
                kth_smallest(scratch, q_rank)
            }
        };

        let mut records = Vec::with_capacity(config.max_iters / config.record_every + 2);
        let gamma0 = quantile.then(|| threshold(&resid, &mut scratch));
        records.push(self.record(problem, 0, &x, x_star, gamma0, &start));

        let mut stopped_early = false;
        let mut k_done = 0;
        for k in 1..=config.max_iters {
            let mut gamma = None;
            let j = if quantile {
                let g = threshold(&resid, &mut scratch);
                gamma = Some(g);
                if uniform {
                    loop {
                        let i = self.pool[rng.random_range(0..self.pool.len())];
                        if resid[i].abs() / self.dir_norms[i] <= g {
                            break i;
                        }
                    }
                } else {
                    self.draw_admissible(&resid, g, &mut rng)
                        .ok_or(Error::NoAdmissibleRow { iteration: k })?
                }
            } else if uniform {
                self.pool[rng.random_range(0..self.pool.len())]
            } else {
                self.sampler
                    .as_ref()
                    .expect("non-empty pool has a sampler")
                    .draw(&mut rng)?
            };

            let r_j = b_act[j] - dot(self.a_act.row(j), &x);
            let t = r_j / self.weights[j];
            axpy(t, self.dirs.row(j), &mut x);

            let refresh = k % DRIFT_INTERVAL == 0;
            if refresh && self.subspace {
                let mut v: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
                self.pf.project_in_place(&mut v);
                for ((xi, vi), x0i) in x.iter_mut().zip(&v).zip(&x0) {
                    *xi = x0i + vi;
                }
            }
            if quantile {
                match gram {
                    Some(g) if !refresh => {
                        let col = &g[j * m_act..(j + 1) * m_act];
                        axpy(-t, col, &mut resid);
                    }
                    _ => self.residuals_into(&b_act, &x, &mut resid),
                }
            }

            k_done = k;
            let stop = stop_at.is_some_and(|s| dist(&x, x_star.expect("stop_at needs x*")) <= s);
            if k % config.record_every == 0 || k == config.max_iters || stop {
                records.push(self.record(problem, k, &x, x_star, gamma, &start));
            }
            if stop {
                stopped_early = k < config.max_iters;
                break;
            }
        }

        for v in x.iter_mut() {
            *v += 0.0;
        }
        Ok(ConvergenceTrace {
            method: config.method,
            iterations: records,
            initial_error,
            final_x: x,
            iterations_run: k_done,
            stopped_early,
            rng_seed_used: config.seed,
            rng: rng::GENERATOR_NAME.to_string(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn residuals_into(&self, b_act: &[f64], x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = b_act[i] - dot(self.a_act.row(i), x);
        }
    }

    fn draw_admissible<R: Rng + ?Sized>(&self, resid: &[f64], gamma: f64, rng: &mut R) -> Option<usize> {
        let mut total = 0.0;
        let mut last = None;
        for (i, r) in resid.iter().enumerate() {
            if r.abs() <= gamma && self.weights[i] > 0.0 {
                total += self.weights[i];
                last = Some(i);
            }
        }
        let last = last?;
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, r) in resid.iter().enumerate() {
            if r.abs() <= gamma && self.weights[i] > 0.0 {
                acc += self.weights[i];
                if acc > u {
                    return Some(i);
                }
            }
        }
        Some(last)
    }

    fn record(
        &self,
        problem: &LinearProblem,
        k: usize,
        x: &[f64],
        x_star: Option<&[f64]>,
        gamma_q: Option<f64>,
        start: &Instant,
    ) -> TraceRecord {
        let res_sq: f64 = self
            .i1
            .iter()
            .map(|&i| {
                let r = problem.b[i] - dot(problem.a.row(i), x);
                r * r
            })
            .sum();
        TraceRecord {
            k,
            error: x_star.map(|xs| dist(x, xs)),
            residual_norm: res_sq.sqrt(),
            gamma_q,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Builds a [`SolverSetup`] for the problem and runs it once.
pub fn run_solver(problem: &LinearProblem, config: &SolverConfig) -> Result<ConvergenceTrace> {
    SolverSetup::for_problem(problem, config)?.run(problem, config)
}
