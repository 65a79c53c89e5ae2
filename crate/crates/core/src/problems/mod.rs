//! Instance generators: random matrix families, coherent constructions,
//! the line ODE with competing initial conditions and a parallel-beam CT
//! system, plus measurement noise and sparse corruption injection.

mod ct;
mod ode;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use ct::{ct_system, shepp_logan, CtGeometry, SHEPP_LOGAN_ELLIPSES};
pub use ode::{ode_line_system, OdePlacement};

use crate::error::{Error, Result};
use crate::linalg::{householder_qr, norm, DenseMatrix};
use crate::rng::{self, StreamRng};
use crate::solvers::LinearProblem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// i.i.d. standard normal entries.
    GaussianRows,
    /// Standard normal rows scaled to unit norm.
    NormalizedGaussianRows,
    /// i.i.d. entries uniform on `[lo, hi]`.
    UniformEntries { lo: f64, hi: f64 },
    /// Square matrix whose first `m0` rows are `(1 - ε) ū + ε u_i` for an
    /// orthonormal `u_1..u_m0` with mean `ū`, and whose remaining rows are
    /// an orthonormal basis of the complement. Requires `m == n`.
    CorrelatedMean { m0: usize, epsilon: f64 },
    /// First `r` rows are unit Gaussians; every later row is
    /// `(1 - ε) a'_j + ε c_j` with `a'_j` one of the first `r` rows and
    /// `c_j` a unit vector orthogonal to all of them.
    LowRankCoherent { r: usize, epsilon: f64 },
    /// `y'' = 0` on 100 grid points with two competing sets of initial
    /// conditions. Ignores `m` and `n`.
    Toeplitz1m21WithConditions {
        #[serde(default)]
        placement: OdePlacement,
    },
    /// Shepp-Logan phantom with parallel-beam projections. Ignores `m` and `n`.
    ParallelBeamPhantom {
        n_img: usize,
        angle_step_deg: f64,
        n_rays: usize,
    },
}

/// Which rows form `I0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrustedRows {
    /// The rows the construction singles out (`m0` for CorrelatedMean, `r`
    /// for LowRankCoherent, the difference block for the ODE), none otherwise.
    #[default]
    FamilyDefault,
    First(usize),
    /// `m0` rows drawn uniformly without replacement.
    Random(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub trusted: TrustedRows,
}

impl GeneratorSpec {
    pub fn new(family: Family, m: usize, n: usize, seed: u64) -> Self {
        Self {
            family,
            m,
            n,
            seed,
            trusted: TrustedRows::FamilyDefault,
        }
    }

    pub fn trusted(mut self, trusted: TrustedRows) -> Self {
        self.trusted = trusted;
        self
    }
}

fn gaussian_vec(r: &mut StreamRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let s = norm(&v);
    v.iter_mut().for_each(|t| *t /= s);
    v
}

/// Random `n x n` orthogonal matrix (QR of a Gaussian matrix).
fn random_orthogonal(n: usize, r: &mut StreamRng) -> DenseMatrix {
    let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(r));
    householder_qr(&g).0
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("epsilon {eps} outside (0, 1)")))
    }
}

/// The CorrelatedMean matrix on its own.
pub fn correlated_mean_matrix(n: usize, m0: usize, epsilon: f64, seed: u64) -> DenseMatrix {
    let q = random_orthogonal(n, &mut rng::stream(seed));
    let cols: Vec<Vec<f64>> = (0..n).map(|j| q.column(j)).collect();
    let mut mean = vec![0.0; n];
    for u in &cols[..m0] {
        for (s, v) in mean.iter_mut().zip(u) {
            *s += v / m0 as f64;
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            if i < m0 {
                mean.iter()
                    .zip(&cols[i])
                    .map(|(b, u)| (1.0 - epsilon) * b + epsilon * u)
                    .collect()
            } else {
                cols[i].clone()
            }
        })
        .collect();
    DenseMatrix::from_rows(&rows).expect("square construction")
}

/// Square matrix whose first `m0` rows are an orthonormal basis `u_i` of a
/// subspace `U` and whose remaining rows are `(1 - ε) v_j + ε c_j`, with
/// `v_j` a random unit vector in `U` and `c_j` an orthonormal basis of `U⊥`.
/// Every untrusted row has `‖P a_j‖ = ε` while `‖a_j‖² = (1 - ε)² + ε²`.
pub fn coherent_block_matrix(n: usize, m0: usize, epsilon: f64, seed: u64) -> DenseMatrix {
    let mut r = rng::stream(seed);
    let q = random_orthogonal(n, &mut r);
    let cols: Vec<Vec<f64>> = (0..n).map(|j| q.column(j)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            if i < m0 {
                return cols[i].clone();
            }
            let w = unit(gaussian_vec(&mut r, m0));
            let mut v = vec![0.0; n];
            for (wk, u) in w.iter().zip(&cols[..m0]) {
                for (s, x) in v.iter_mut().zip(u) {
                    *s += wk * x;
                }
            }
            v.iter()
                .zip(&cols[i])
                .map(|(v, c)| (1.0 - epsilon) * v + epsilon * c)
                .collect()
        })
        .collect();
    DenseMatrix::from_rows(&rows).expect("square construction")
}

fn low_rank_coherent(m: usize, n: usize, r: usize, eps: f64, g: &mut StreamRng) -> Result<DenseMatrix> {
    if r == 0 || r >= n || r > m {
        return Err(Error::InvalidSpec(format!("low-rank r = {r} needs 1 <= r < n and r <= m")));
    }
    check_epsilon(eps)?;
    let base: Vec<Vec<f64>> = (0..r).map(|_| unit(gaussian_vec(g, n))).collect();
    let (q, _) = householder_qr(&DenseMatrix::from_columns(n, &base));
    let mut rows = base.clone();
    for _ in r..m {
        let a_prime = &base[g.random_range(0..r)];
        let mut c = gaussian_vec(g, n);
        let coef = q.matvec_t(&c)?;
        let back = q.matvec(&coef)?;
        c.iter_mut().zip(&back).for_each(|(c, b)| *c -= b);
        // second pass so the direction is orthogonal to working precision
        let coef = q.matvec_t(&c)?;
        let back = q.matvec(&coef)?;
        c.iter_mut().zip(&back).for_each(|(c, b)| *c -= b);
        let c = unit(c);
        rows.push(
            a_prime
                .iter()
                .zip(&c)
                .map(|(a, c)| (1.0 - eps) * a + eps * c)
                .collect(),
        );
    }
    DenseMatrix::from_rows(&rows)
}

fn pick_trusted(trusted: TrustedRows, family_default: Vec<usize>, m: usize, g: &mut StreamRng) -> Result<Vec<usize>> {
    let count = match trusted {
        TrustedRows::FamilyDefault => return Ok(family_default),
        TrustedRows::First(k) | TrustedRows::Random(k) => k,
    };
    if count > m {
        return Err(Error::InvalidSpec(format!("{count} trusted rows out of {m}")));
    }
    Ok(match trusted {
        TrustedRows::Random(_) => random_subset(m, count, g),
        _ => (0..count).collect(),
    })
}

/// `k` distinct indices from `0..m`, sorted.
pub(crate) fn random_subset<R: Rng + ?Sized>(m: usize, k: usize, g: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = g.random_range(i..m);
        perm.swap(i, j);
    }
    let mut out = perm[..k].to_vec();
    out.sort_unstable();
    out
}

/// Builds the instance described by `spec`. Everything is drawn from one
/// stream seeded by `spec.seed`, in the order matrix, `x*`, trusted rows.
pub fn generate(spec: &GeneratorSpec) -> Result<LinearProblem> {
    let mut g = rng::stream(spec.seed);
    let (m, n) = (spec.m, spec.n);
    let sized = !matches!(
        spec.family,
        Family::Toeplitz1m21WithConditions { .. } | Family::ParallelBeamPhantom { .. }
    );
    if sized && (m == 0 || n == 0) {
        return Err(Error::InvalidSpec(format!("empty {m}x{n} instance")));
    }
    let mut i0_default = Vec::new();
    let mut problem = match &spec.family {
        Family::GaussianRows | Family::NormalizedGaussianRows => {
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let v = gaussian_vec(&mut g, n);
                    if matches!(spec.family, Family::NormalizedGaussianRows) {
                        unit(v)
                    } else {
                        v
                    }
                })
                .collect();
            let a = DenseMatrix::from_rows(&rows)?;
            let x = gaussian_vec(&mut g, n);
            LinearProblem::consistent(a, x, vec![])?
        }
        Family::UniformEntries { lo, hi } => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidSpec(format!("uniform range [{lo}, {hi}]")));
            }
            let a = DenseMatrix::from_fn(m, n, |_, _| g.random_range(*lo..=*hi));
            let x = gaussian_vec(&mut g, n);
            LinearProblem::consistent(a, x, vec![])?
        }
        Family::CorrelatedMean { m0, epsilon } => {
            check_epsilon(*epsilon)?;
            if m != n || *m0 == 0 || *m0 > n {
                return Err(Error::InvalidSpec(format!(
                    "correlated-mean needs m == n and 1 <= m0 <= n, got {m}x{n}, m0 = {m0}"
                )));
            }
            let a = correlated_mean_matrix(n, *m0, *epsilon, g.random());
            i0_default = (0..*m0).collect();
            let x = gaussian_vec(&mut g, n);
            LinearProblem::consistent(a, x, vec![])?
        }
        Family::LowRankCoherent { r, epsilon } => {
            let a = low_rank_coherent(m, n, *r, *epsilon, &mut g)?;
            i0_default = (0..*r).collect();
            let x = gaussian_vec(&mut g, n);
            LinearProblem::consistent(a, x, vec![])?
        }
        Family::Toeplitz1m21WithConditions { placement } => {
            let p = ode_line_system(placement)?;
            i0_default = p.i0.clone();
            p.with_i0(vec![])?
        }
        Family::ParallelBeamPhantom {
            n_img,
            angle_step_deg,
            n_rays,
        } => ct_system(*n_img, *angle_step_deg, *n_rays, spec.seed)?,
    };
    let m_actual = problem.m();
    problem.i0 = pick_trusted(spec.trusted, i0_default, m_actual, &mut g)?;
    problem.metadata.provenance = Some(serde_json::to_value(spec).expect("spec serializes"));
    problem.validate()?;
    Ok(problem)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    /// i.i.d. uniform on `[-a, a]`.
    UniformSymmetric(f64),
    /// i.i.d. normal with standard deviation `s`.
    GaussianScale(f64),
}

/// Adds `r` to `b` (only on `I1` when `untrusted_only`) and records it.
/// A zero magnitude leaves the problem untouched.
pub fn add_noise(problem: &LinearProblem, law: NoiseLaw, untrusted_only: bool, seed: u64) -> Result<LinearProblem> {
    let scale = match law {
        NoiseLaw::UniformSymmetric(a) | NoiseLaw::GaussianScale(a) => a,
    };
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidSpec(format!("noise magnitude {scale}")));
    }
    if scale == 0.0 {
        return Ok(problem.clone());
    }
    let mut g = rng::stream(seed);
    let m = problem.m();
    let mut r: Vec<f64> = (0..m)
        .map(|_| match law {
            NoiseLaw::UniformSymmetric(a) => g.random_range(-a..=a),
            NoiseLaw::GaussianScale(s) => {
                let z: f64 = StandardNormal.sample(&mut g);
                s * z
            },
        })
        .collect();
    if untrusted_only {
        for &i in &problem.i0 {
            r[i] = 0.0;
        }
    }
    let mut out = problem.clone();
    out.b.iter_mut().zip(&r).for_each(|(b, r)| *b += r);
    let total = match &problem.noise {
        Some(prev) => prev.iter().zip(&r).map(|(p, r)| p + r).collect(),
        None => r,
    };
    out.noise = Some(total);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeLaw {
    /// Uniform on `[-a, a]`.
    UniformSymmetric(f64),
    /// Uniform on `[lo, hi]`.
    UniformRange(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub count: usize,
    pub magnitude: MagnitudeLaw,
    pub seed: u64,
}

/// Adds sparse corruptions on `count` rows drawn uniformly from `I1`.
pub fn add_corruptions(problem: &LinearProblem, spec: &CorruptionSpec) -> Result<LinearProblem> {
    let i1 = problem.i1();
    if spec.count > i1.len() {
        return Err(Error::TooManyCorruptions {
            requested: spec.count,
            available: i1.len(),
        });
    }
    let (lo, hi) = match spec.magnitude {
        MagnitudeLaw::UniformSymmetric(a) => (-a, a),
        MagnitudeLaw::UniformRange(lo, hi) => (lo, hi),
    };
    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidSpec(format!("corruption range [{lo}, {hi}]")));
    }
    if spec.count == 0 {
        return Ok(problem.clone());
    }
    let mut g = rng::stream(spec.seed);
    let picks = random_subset(i1.len(), spec.count, &mut g);
    let support: Vec<usize> = picks.iter().map(|&k| i1[k]).collect();
    let mut out = problem.clone();
    for &j in &support {
        out.b[j] += g.random_range(lo..=hi);
    }
    let mut all = problem.corruption_support.clone().unwrap_or_default();
    all.extend_from_slice(&support);
    all.sort_unstable();
    all.dedup();
    out.corruption_support = Some(all);
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_projector, dot, norm_sq, singular_values, DEFAULT_TOL_RANK};

    #[test]
    fn gaussian_is_consistent_and_deterministic() {
        let spec = GeneratorSpec::new(Family::GaussianRows, 3, 3, 7);
        let p = generate(&spec).unwrap();
        let ax = p.a.matvec(p.x_star.as_ref().unwrap()).unwrap();
        assert_eq!(ax, p.b);
        assert_eq!(generate(&spec).unwrap(), p);
        assert!(p.metadata.provenance.is_some());
        let q = generate(&GeneratorSpec::new(Family::NormalizedGaussianRows, 5, 3, 7)).unwrap();
        assert!(q.a.row_norms_sq().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn uniform_entries_are_coherent() {
        let spec = GeneratorSpec::new(Family::UniformEntries { lo: 0.9, hi: 1.1 }, 2000, 1000, 1);
        let p = generate(&spec).unwrap();
        assert!(p.a.as_slice().iter().all(|v| (0.9..=1.1).contains(v)));
        let floor = 2.0 * 0.9 * 1.1 / (0.9f64.powi(2) + 1.1f64.powi(2));
        let mut worst = 1.0f64;
        for i in 0..50 {
            for j in i + 1..50 {
                let (a, b) = (p.a.row(i), p.a.row(j));
                worst = worst.min(dot(a, b) / (norm(a) * norm(b)));
            }
        }
        assert!(worst >= floor && floor >= 0.98, "{worst}");
    }

    #[test]
    fn low_rank_coherent_projection() {
        let spec = GeneratorSpec::new(Family::LowRankCoherent { r: 20, epsilon: 0.1 }, 2000, 1000, 3);
        let p = generate(&spec).unwrap();
        assert_eq!(p.i0, (0..20).collect::<Vec<_>>());
        let pf = build_projector(&p.a.select_rows(&p.i0), DEFAULT_TOL_RANK).unwrap();
        for j in 20..2000 {
            let pa = pf.project(p.a.row(j)).unwrap();
            assert!((norm(&pa) - 0.1).abs() < 1e-8);
        }
    }

    #[test]
    fn low_rank_coherent_tail_is_small() {
        let (m, eps) = (300usize, 0.1);
        let spec = GeneratorSpec::new(Family::LowRankCoherent { r: 20, epsilon: eps }, m, 100, 4);
        let p = generate(&spec).unwrap();
        let s = singular_values(&p.a).unwrap();
        let tail: f64 = s[20..].iter().map(|v| v * v).sum();
        assert!(tail <= eps * eps * m as f64);
    }

    #[test]
    fn correlated_mean_spec_checks() {
        let ok = GeneratorSpec::new(Family::CorrelatedMean { m0: 3, epsilon: 0.1 }, 6, 6, 1);
        let p = generate(&ok).unwrap();
        assert_eq!(p.i0, vec![0, 1, 2]);
        let bad = GeneratorSpec::new(Family::CorrelatedMean { m0: 3, epsilon: 0.1 }, 8, 6, 1);
        assert!(matches!(generate(&bad), Err(Error::InvalidSpec(_))));
        let bad = GeneratorSpec::new(Family::LowRankCoherent { r: 2, epsilon: 1.5 }, 8, 6, 1);
        assert!(matches!(generate(&bad), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn trusted_selection() {
        let base = GeneratorSpec::new(Family::GaussianRows, 20, 5, 2);
        let first = generate(&base.clone().trusted(TrustedRows::First(4))).unwrap();
        assert_eq!(first.i0, vec![0, 1, 2, 3]);
        let rnd = generate(&base.clone().trusted(TrustedRows::Random(6))).unwrap();
        assert_eq!(rnd.i0.len(), 6);
        assert!(rnd.i0.windows(2).all(|w| w[0] < w[1]));
        assert!(generate(&base.trusted(TrustedRows::First(21))).is_err());
    }

    #[test]
    fn noise_cases() {
        let p = generate(&GeneratorSpec::new(Family::GaussianRows, 300, 20, 5).trusted(TrustedRows::First(10))).unwrap();
        assert_eq!(add_noise(&p, NoiseLaw::UniformSymmetric(0.0), false, 1).unwrap(), p);
        let q = add_noise(&p, NoiseLaw::UniformSymmetric(0.01), false, 1).unwrap();
        let r = q.noise.as_ref().unwrap();
        assert!(r.iter().all(|v| v.abs() <= 0.01));
        let mean = r.iter().sum::<f64>() / 300.0;
        assert!(mean.abs() <= 3.0 * (0.01 / 3f64.sqrt()) / 300f64.sqrt());
        assert_eq!(q.x_star, p.x_star);
        for k in 0..300 {
            assert_eq!(q.b[k], p.b[k] + r[k]);
        }
        let u = add_noise(&p, NoiseLaw::GaussianScale(0.1), true, 1).unwrap();
        assert!(p.i0.iter().all(|&i| u.noise.as_ref().unwrap()[i] == 0.0 && u.b[i] == p.b[i]));
        let h = crate::analysis::noisy_horizon(&u.a, &u.i0, u.noise.as_ref().unwrap(), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(h.gamma0, 0.0);
    }

    #[test]
    fn corruption_cases() {
        let p = generate(&GeneratorSpec::new(Family::NormalizedGaussianRows, 500, 50, 8).trusted(TrustedRows::Random(20))).unwrap();
        let none = CorruptionSpec { count: 0, magnitude: MagnitudeLaw::UniformSymmetric(1.0), seed: 1 };
        assert_eq!(add_corruptions(&p, &none).unwrap(), p);

        let spec = CorruptionSpec { count: 100, magnitude: MagnitudeLaw::UniformSymmetric(1.0), seed: 1 };
        let c = add_corruptions(&p, &spec).unwrap();
        let changed: Vec<usize> = (0..500).filter(|&i| c.b[i] != p.b[i]).collect();
        assert_eq!(changed.len(), 100);
        assert_eq!(c.corruption_support.as_ref().unwrap(), &changed);
        assert!(changed.iter().all(|j| p.i0.binary_search(j).is_err()));
        assert!(changed.iter().all(|&j| (c.b[j] - p.b[j]).abs() <= 1.0 + 1e-12));

        let all = CorruptionSpec { count: 480, magnitude: MagnitudeLaw::UniformRange(2.0, 6.0), seed: 2 };
        let c = add_corruptions(&p, &all).unwrap();
        assert_eq!(c.corruption_support.unwrap(), p.i1());
        let over = CorruptionSpec { count: 481, ..all };
        assert!(matches!(add_corruptions(&p, &over), Err(Error::TooManyCorruptions { .. })));
    }

    #[test]
    fn coherent_block_norms() {
        let a = coherent_block_matrix(6, 2, 0.2, 1);
        let want = 0.8f64.powi(2) + 0.04;
        for j in 2..6 {
            assert!((norm_sq(a.row(j)) - want).abs() < 1e-12);
        }
    }
}
