use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, singular_values, DenseMatrix, ProjectorFactorization};
use crate::rng;
use crate::solvers::complement;

pub const DEFAULT_EXACT_MAX_SUBSETS: f64 = 1e6;
pub const DEFAULT_SAMPLED_SUBSETS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    /// Enumerate every subset; refuse when there are more than `max_subsets`.
    Exact { max_subsets: f64 },
    /// Minimum over random subsets. Only an upper bound on the infimum.
    SampledLowerEstimate { samples: usize, seed: u64 },
}

impl Default for SubsetMode {
    fn default() -> Self {
        SubsetMode::Exact {
            max_subsets: DEFAULT_EXACT_MAX_SUBSETS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpectrum {
    pub value: f64,
    /// True only for exhaustive enumeration.
    pub certified: bool,
    pub subsets_evaluated: usize,
    pub subset_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionBoundReport {
    pub q: f64,
    pub beta: f64,
    pub sigma_qb_min: f64,
    pub z_qb: f64,
    pub sigma_max: f64,
    pub c_qb: f64,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    /// Whether `sigma_qb_min` came from exhaustive enumeration.
    pub certified: bool,
    pub converges_guaranteed: bool,
}

/// `k = ⌊α·m1⌋`, at least 1.
pub fn subset_size(alpha: f64, m1: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("subset fraction {alpha} outside (0, 1]")));
    }
    let k = (alpha * m1 as f64 * (1.0 + 1e-12)).floor() as usize;
    if k < 1 {
        return Err(Error::InvalidConfig(format!(
            "subset fraction {alpha} of {m1} rows is empty"
        )));
    }
    Ok(k.min(m1))
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rows of `A_I1` written in the basis of `Range(P)`. Row subsets of this
/// matrix have the same singular values as the corresponding rows of `A_I1 P`.
fn reduced_rows(a: &DenseMatrix, i0: &[usize], pf: &ProjectorFactorization) -> Result<DenseMatrix> {
    let a1 = a.select_rows(&complement(i0, a.rows()));
    let comp = pf.complement_basis()?;
    a1.matmul(&comp)
}

fn sigma_min_plus_of(b: &DenseMatrix, rows: &[usize], tol: f64) -> Result<f64> {
    let sub = b.select_rows(rows);
    if sub.cols() == 0 {
        return Ok(0.0);
    }
    let s = singular_values(&sub)?;
    let cut = tol * s.first().copied().unwrap_or(0.0);
    Ok(s.iter().rev().copied().find(|&v| v > cut && v > 0.0).unwrap_or(0.0))
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `inf` over subsets `T ⊆ I1` of size `⌊α·|I1|⌋` of `σ_min⁺((A_I1 P)_T)`.
pub fn subset_min_singular(
    a: &DenseMatrix,
    i0: &[usize],
    pf: &ProjectorFactorization,
    alpha: f64,
    mode: SubsetMode,
) -> Result<SubsetSpectrum> {
    let m1 = a.rows() - i0.len();
    let k = subset_size(alpha, m1)?;
    let b = reduced_rows(a, i0, pf)?;
    let tol = pf.tol_rank;
    match mode {
        SubsetMode::Exact { max_subsets } => {
            let needed = binomial(m1, k);
            if needed > max_subsets {
                return Err(Error::CombinatorialBlowup {
                    needed,
                    cap: max_subsets,
                });
            }
            const BATCH: usize = 4096;
            let mut idx: Vec<usize> = (0..k).collect();
            let mut best = f64::INFINITY;
            let mut count = 0usize;
            let mut more = true;
            while more {
                let mut batch = Vec::with_capacity(BATCH);
                while more && batch.len() < BATCH {
                    batch.push(idx.clone());
                    more = next_combination(&mut idx, m1);
                }
                count += batch.len();
                let vals: Vec<f64> = batch
                    .par_iter()
                    .map(|rows| sigma_min_plus_of(&b, rows, tol))
                    .collect::<Result<_>>()?;
                best = vals.into_iter().fold(best, f64::min);
            }
            Ok(SubsetSpectrum {
                value: best,
                certified: true,
                subsets_evaluated: count,
                subset_size: k,
            })
        }
        SubsetMode::SampledLowerEstimate { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidConfig("zero sampled subsets".into()));
            }
            let mut r = rng::stream(seed);
            let mut perm: Vec<usize> = (0..m1).collect();
            let subsets: Vec<Vec<usize>> = (0..samples)
                .map(|_| {
                    for i in 0..k {
                        let j = r.random_range(i..m1);
                        perm.swap(i, j);
                    }
                    let mut t = perm[..k].to_vec();
                    t.sort_unstable();
                    t
                })
                .collect();
            let vals: Vec<f64> = subsets
                .par_iter()
                .map(|rows| sigma_min_plus_of(&b, rows, tol))
                .collect::<Result<_>>()?;
            Ok(SubsetSpectrum {
                value: vals.into_iter().fold(f64::INFINITY, f64::min),
                certified: false,
                subsets_evaluated: samples,
                subset_size: k,
            })
        }
    }
}

/// `Z_α`: the `k` largest `‖P a_j‖²` over `I1`, summed.
pub fn subset_max_frobenius(
    a: &DenseMatrix,
    i0: &[usize],
    pf: &ProjectorFactorization,
    alpha: f64,
) -> Result<f64> {
    let i1 = complement(i0, a.rows());
    let k = subset_size(alpha, i1.len())?;
    let mut norms = i1
        .iter()
        .map(|&j| pf.project(a.row(j)).map(|p| norm_sq(&p)))
        .collect::<Result<Vec<f64>>>()?;
    norms.sort_unstable_by(|x, y| y.total_cmp(x));
    Ok(norms[..k].iter().sum())
}

/// Contraction constant `C_{q,β}` of QuantileSCRK with a `β` fraction of
/// corrupted rows, and the sufficient condition for it to be positive.
pub fn corruption_bound(
    a: &DenseMatrix,
    i0: &[usize],
    pf: &ProjectorFactorization,
    q: f64,
    beta: f64,
    mode: SubsetMode,
) -> Result<CorruptionBoundReport> {
    if !(beta >= 0.0 && beta < q && q < 1.0 - beta) {
        return Err(Error::InvalidQuantileBeta { q, beta });
    }
    let alpha = q - beta;
    let spec = subset_min_singular(a, i0, pf, alpha, mode)?;
    let z = subset_max_frobenius(a, i0, pf, alpha)?;
    let b = reduced_rows(a, i0, pf)?;
    let sigma_max = if b.cols() == 0 {
        0.0
    } else {
        singular_values(&b)?.first().copied().unwrap_or(0.0)
    };
    let ratio = beta / (1.0 - q);
    let rhs = ratio + 2.0 * ratio.sqrt();
    let s2 = spec.value * spec.value;
    let lhs = if sigma_max > 0.0 { s2 / (sigma_max * sigma_max) } else { 0.0 };
    let c = if z > 0.0 {
        (s2 - sigma_max * sigma_max * rhs) / z
    } else {
        0.0
    };
    Ok(CorruptionBoundReport {
        q,
        beta,
        sigma_qb_min: spec.value,
        z_qb: z,
        sigma_max,
        c_qb: c,
        condition_lhs: lhs,
        condition_rhs: rhs,
        certified: spec.certified,
        converges_guaranteed: c > 0.0 && spec.certified,
    })
}
