use rand::Rng;

use super::LinearProblem;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, ProjectorFactorization};

/// Draws `j` with probability `weights[j] / Σ weights`.
pub fn sample_row<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    PrefixSampler::new(weights)?.draw(rng)
}

/// Cumulative-sum sampler with `O(log m)` draws.
#[derive(Clone, Debug)]
pub(crate) struct PrefixSampler {
    prefix: Vec<f64>,
    last_positive: usize,
}

impl PrefixSampler {
    pub(crate) fn new(weights: &[f64]) -> Result<Self> {
        let mut prefix = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "sampling weight {i} is {w}"
                )));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            acc += w;
            prefix.push(acc);
        }
        match last_positive {
            Some(last_positive) => Ok(Self {
                prefix,
                last_positive,
            }),
            None => Err(Error::AllZeroWeights),
        }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = *self.prefix.last().expect("non-empty when constructed");
        let u = rng.random::<f64>() * total;
        let j = self.prefix.partition_point(|&p| p <= u);
        Ok(j.min(self.last_positive))
    }
}

/// Rank `k = max(1, ⌊q·len⌋)` used by every quantile in the crate.
pub fn quantile_rank(q: f64, len: usize) -> usize {
    // guard against q·len landing just below an integer, e.g. 0.29 * 100
    let raw = (q * len as f64 * (1.0 + 1e-12)).floor() as usize;
    raw.clamp(1, len.max(1))
}

/// `k`-th smallest of `|residuals|` with `k = max(1, ⌊q·len⌋)`.
pub fn quantile_threshold(residuals: &[f64], q: f64) -> f64 {
    assert!(!residuals.is_empty(), "quantile of an empty residual set");
    let mut mags: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    kth_smallest(&mut mags, quantile_rank(q, residuals.len()))
}

/// `k`-th smallest (1-based) entry; reorders the buffer.
pub(crate) fn kth_smallest(values: &mut [f64], k: usize) -> f64 {
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Quantile of `|b_j - a_jᵀ x| / ‖P a_j‖` over the non-degenerate rows of
/// `I1`, the threshold paired with uniform sampling and rejection.
pub fn uniform_variant_threshold(
    problem: &LinearProblem,
    pf: &ProjectorFactorization,
    x: &[f64],
    q: f64,
) -> Result<f64> {
    let mut scaled = Vec::new();
    for j in problem.i1() {
        let a = problem.a.row(j);
        let pa = pf.project(a)?;
        let pn = norm_sq(&pa).sqrt();
        if pn <= pf.tol_rank * norm_sq(a).sqrt() || pn == 0.0 {
            continue;
        }
        scaled.push((problem.b[j] - dot(a, x)).abs() / pn);
    }
    if scaled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let k = quantile_rank(q, scaled.len());
    Ok(kth_smallest(&mut scaled, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_projector, DenseMatrix};
    use crate::rng;

    #[test]
    fn single_weight_is_certain() {
        let mut r = rng::stream(1);
        for _ in 0..100 {
            assert_eq!(sample_row(&[0.0, 2.0, 0.0], &mut r).unwrap(), 1);
        }
        assert!(matches!(sample_row(&[0.0, 0.0], &mut r), Err(Error::AllZeroWeights)));
    }

    #[test]
    fn empirical_frequencies() {
        for (w, lo, hi) in [([1.0, 1.0], 0.48, 0.52), ([3.0, 1.0], 0.74, 0.76)] {
            let s = PrefixSampler::new(&w).unwrap();
            let mut r = rng::stream(0);
            let hits = (0..100_000).filter(|_| s.draw(&mut r).unwrap() == 0).count();
            let f = hits as f64 / 1e5;
            assert!((lo..=hi).contains(&f), "{f}");
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(quantile_threshold(&[1.0, -2.0, 3.0, 4.0], 0.75), 3.0);
        assert_eq!(quantile_threshold(&[1.0, -7.0, 3.0], 1.0), 7.0);
        assert_eq!(quantile_threshold(&[2.5; 6], 0.3), 2.5);
        assert_eq!(quantile_threshold(&[5.0, 1.0], 0.01), 1.0);
        assert_eq!(quantile_rank(0.29, 100), 29);
    }

    #[test]
    fn uniform_variant_examples() {
        // identity rows: ‖P a_j‖ = 1 when I0 is empty
        let p = LinearProblem::new(DenseMatrix::identity(3), vec![1.0, -4.0, 2.0], vec![]).unwrap();
        let pf = build_projector(&DenseMatrix::zeros(0, 3), 1e-10).unwrap();
        let x = [0.0; 3];
        let g = uniform_variant_threshold(&p, &pf, &x, 0.5).unwrap();
        assert_eq!(g, quantile_threshold(&p.b, 0.5));

        // residuals (2, 2) with projected norms (1, 2): scaled values {2, 1}
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let p = LinearProblem::new(a, vec![2.0, 2.0], vec![]).unwrap();
        let pf = build_projector(&DenseMatrix::zeros(0, 2), 1e-10).unwrap();
        assert_eq!(uniform_variant_threshold(&p, &pf, &[0.0, 0.0], 0.5).unwrap(), 1.0);

        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![3.0, 0.0]]).unwrap();
        let p = LinearProblem::new(a.clone(), vec![1.0, 5.0], vec![0]).unwrap();
        // the only I1 row is parallel to the trusted row
        let pf = build_projector(&a.select_rows(&[0]), 1e-10).unwrap();
        assert!(matches!(
            uniform_variant_threshold(&p, &pf, &[1.0, 0.0], 0.5),
            Err(Error::EmptyPool)
        ));
    }
}
