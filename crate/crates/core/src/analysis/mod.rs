//! Spectral quantities behind the convergence guarantees: expected rates of
//! RK and SCRK, the error horizon under measurement noise, the coherence
//! bound, subset spectra and the contraction constant of QuantileSCRK, and
//! row-subset sampling by norms or leverage scores.

mod leverage;
mod subsets;

use serde::{Deserialize, Serialize};

pub use leverage::{leverage_scores, sample_good_subset, SubsetScheme};
pub use subsets::{
    corruption_bound, subset_max_frobenius, subset_min_singular, subset_size,
    CorruptionBoundReport, SubsetMode, SubsetSpectrum, DEFAULT_EXACT_MAX_SUBSETS,
    DEFAULT_SAMPLED_SUBSETS,
};

use crate::error::{Error, Result};
use crate::linalg::{
    build_projector, dot, norm_sq, projected_submatrix_svd, pseudoinverse, singular_values,
    DenseMatrix, ProjectorFactorization,
};
use crate::solvers::complement;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub m: usize,
    pub n: usize,
    pub m0: usize,
    pub rank_i0: usize,
    /// `σ_min⁺(A_I1 P)`
    pub sigma_min_plus_proj: f64,
    /// `‖A_I1 P‖_F`
    pub frob_proj: f64,
    pub sigma_max_proj: f64,
    /// `σ_min(A)`
    pub sigma_min_full: f64,
    pub frob_full: f64,
    /// `1 - σ_min⁺(A_I1 P)² / ‖A_I1 P‖_F²`
    pub scrk_rate: f64,
    /// `1 - σ_min(A)² / ‖A‖_F²`
    pub rk_rate: f64,
    /// `δ` with `δ² = 1 - max_{j ∈ I1} ‖P a_j‖² / ‖a_j‖²`
    pub coherence_delta: f64,
    /// `(m - m0) / (n - m0)`, absent when `m0 >= n`
    pub effective_aspect_ratio: Option<f64>,
}

/// Expected per-iteration contraction factors of SCRK and RK.
///
/// `A` must have full column rank. When every row of `I1` lies in the
/// trusted row space, `A_I1 P = 0` and the SCRK rate is reported as 0 (the
/// starting iterate is already exact).
pub fn scrk_rate_bound(a: &DenseMatrix, i0: &[usize], tol_rank: f64) -> Result<SpectralReport> {
    let (m, n) = a.shape();
    let s_full = singular_values(a)?;
    let sigma_min_full = s_full.last().copied().unwrap_or(0.0);
    if m < n || sigma_min_full <= tol_rank * s_full[0] {
        return Err(Error::RankDeficient(format!(
            "{m}x{n} matrix does not have full column rank"
        )));
    }
    let frob_full = a.frobenius_norm();
    let pf = build_projector(&a.select_rows(i0), tol_rank)?;
    let i1 = complement(i0, m);
    let a1 = a.select_rows(&i1);
    let s = projected_submatrix_svd(&a1, &pf)?;
    let proj = pf.project_rows(&a1)?;
    let frob_proj = proj.frobenius_norm();
    let sigma_min_plus_proj = s.sigma_min_positive(tol_rank);
    let scrk_rate = if frob_proj == 0.0 {
        0.0
    } else {
        1.0 - (sigma_min_plus_proj / frob_proj).powi(2)
    };
    let rk_rate = 1.0 - (sigma_min_full / frob_full).powi(2);
    let m0 = i0.len();
    Ok(SpectralReport {
        m,
        n,
        m0,
        rank_i0: pf.rank,
        sigma_min_plus_proj,
        frob_proj,
        sigma_max_proj: s.sigma_max(),
        sigma_min_full,
        frob_full,
        scrk_rate,
        rk_rate,
        coherence_delta: coherence_delta_sq(a, i0, &pf)?.sqrt(),
        effective_aspect_ratio: (n > m0).then(|| (m - m0) as f64 / (n - m0) as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub gamma0: f64,
    pub gamma1: f64,
    /// SCRK rate `1 - σ_min⁺(A_I1 P)² / ‖A_I1 P‖_F²`.
    pub rate: f64,
    /// `σ_min(A_I0)`, absent when `I0` is empty.
    pub sigma_min_i0: Option<f64>,
}

impl HorizonReport {
    pub fn horizon(&self) -> f64 {
        self.gamma0 + self.gamma1
    }
}

/// Asymptotic mean squared error of SCRK run on `b + r`:
///
/// `γ0 = 2‖r_I0‖²/σ_min(A_I0)² - ‖A_I0† r_I0‖²` and
/// `γ1 = ‖r_I1 - A_I1 A_I0† r_I0‖² / σ_min⁺(A_I1 P)²`.
///
/// `A_I0` must have full row rank.
pub fn noisy_horizon(
    a: &DenseMatrix,
    i0: &[usize],
    noise_r: &[f64],
    tol_rank: f64,
) -> Result<HorizonReport> {
    let (m, _) = a.shape();
    if noise_r.len() != m {
        return Err(Error::dims(format!("noise of length {} for {m} rows", noise_r.len())));
    }
    let a0 = a.select_rows(i0);
    let r0: Vec<f64> = i0.iter().map(|&i| noise_r[i]).collect();
    let i1 = complement(i0, m);
    let a1 = a.select_rows(&i1);
    let r1: Vec<f64> = i1.iter().map(|&i| noise_r[i]).collect();

    let (sigma_min_i0, gamma0, shift) = if i0.is_empty() {
        (None, 0.0, vec![0.0; a.cols()])
    } else {
        let s0 = singular_values(&a0)?;
        let lo = *s0.last().expect("non-empty block");
        if a0.rows() > a0.cols() || lo <= tol_rank * s0[0] {
            return Err(Error::RankDeficient("A_I0 does not have full row rank".into()));
        }
        let shift = pseudoinverse(&a0, tol_rank)?.matvec(&r0)?;
        let g0 = 2.0 * norm_sq(&r0) / (lo * lo) - norm_sq(&shift);
        (Some(lo), g0.max(0.0), shift)
    };

    let pf = build_projector(&a0, tol_rank)?;
    let s = projected_submatrix_svd(&a1, &pf)?;
    let smin = s.sigma_min_positive(tol_rank);
    let frob_sq = norm_sq(pf.project_rows(&a1)?.as_slice());
    let num: Vec<f64> = r1
        .iter()
        .zip(a1.matvec(&shift)?)
        .map(|(r, v)| r - v)
        .collect();
    let num = norm_sq(&num);
    let gamma1 = if smin > 0.0 {
        num / (smin * smin)
    } else if num == 0.0 {
        0.0
    } else {
        return Err(Error::RankDeficient(
            "A_I1 P vanishes but the untrusted noise does not".into(),
        ));
    };
    let rate = if frob_sq == 0.0 { 0.0 } else { 1.0 - smin * smin / frob_sq };
    Ok(HorizonReport {
        gamma0,
        gamma1,
        rate,
        sigma_min_i0,
    })
}

/// `δ² = 1 - max_{j ∈ I1} ‖P a_j‖² / ‖a_j‖²`.
pub fn coherence_delta_sq(a: &DenseMatrix, i0: &[usize], pf: &ProjectorFactorization) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in complement(i0, a.rows()) {
        let row = a.row(j);
        let nsq = norm_sq(row);
        if nsq == 0.0 {
            return Err(Error::ZeroRow(j));
        }
        worst = worst.max(norm_sq(&pf.project(row)?) / nsq);
    }
    Ok((1.0 - worst).clamp(0.0, 1.0))
}

/// Rate implied by coherence alone:
/// `1 - σ_min(A)² / ((1 - δ²) ‖A‖_F²)`, clamped to `[0, 1]`.
pub fn coherence_rate_bound(a: &DenseMatrix, i0: &[usize], pf: &ProjectorFactorization) -> Result<f64> {
    let d2 = coherence_delta_sq(a, i0, pf)?;
    let s = singular_values(a)?;
    let smin = s.last().copied().unwrap_or(0.0);
    let fro_sq = norm_sq(a.as_slice());
    if 1.0 - d2 <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - smin * smin / ((1.0 - d2) * fro_sq)).clamp(0.0, 1.0))
}

/// Exact expected squared error after one SCRK step from `x` (on the
/// trusted solution space):
/// `‖x - x*‖² - ‖A_I1 P (x - x*)‖² / ‖A_I1 P‖_F²`.
pub fn expected_one_step_error(
    a: &DenseMatrix,
    i0: &[usize],
    pf: &ProjectorFactorization,
    x: &[f64],
    x_star: &[f64],
) -> Result<f64> {
    let e: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
    let mut pe = e.clone();
    pf.project_in_place(&mut pe);
    let proj = pf.project_rows(&a.select_rows(&complement(i0, a.rows())))?;
    let fro_sq = norm_sq(proj.as_slice());
    let hit: f64 = proj.row_iter().map(|r| dot(r, &pe).powi(2)).sum();
    Ok(norm_sq(&e) - if fro_sq > 0.0 { hit / fro_sq } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, DEFAULT_TOL_RANK};
    use crate::rng;
    use rand::Rng;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut r = rng::stream(seed);
        DenseMatrix::from_fn(m, n, |_, _| r.random::<f64>() * 2.0 - 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn identity_rates() {
        let a = DenseMatrix::identity(6);
        let r = scrk_rate_bound(&a, &[], DEFAULT_TOL_RANK).unwrap();
        assert!((r.scrk_rate - (1.0 - 1.0 / 6.0)).abs() < 1e-14);
        assert!((r.rk_rate - (1.0 - 1.0 / 6.0)).abs() < 1e-14);
        let r = scrk_rate_bound(&a, &[0, 1], DEFAULT_TOL_RANK).unwrap();
        assert!((r.scrk_rate - 0.75).abs() < 1e-14);
        assert_eq!(r.effective_aspect_ratio, Some(1.0));
        assert!(scrk_rate_bound(&DenseMatrix::zeros(3, 2), &[], DEFAULT_TOL_RANK).is_err());
    }

    #[test]
    fn correlated_mean_construction() {
        let (n, m0, eps) = (6usize, 3usize, 0.1);
        let a = crate::problems::correlated_mean_matrix(n, m0, eps, 4);
        let i0: Vec<usize> = (0..m0).collect();
        let rep = scrk_rate_bound(&a, &i0, DEFAULT_TOL_RANK).unwrap();
        let dense = svd(&a).unwrap();
        assert!(dense.sigma_min() <= eps + 1e-12);
        assert!((rep.sigma_min_full - dense.sigma_min()).abs() < 1e-12);
        let pf = build_projector(&a.select_rows(&i0), DEFAULT_TOL_RANK).unwrap();
        let a1p = a.select_rows(&(m0..n).collect::<Vec<_>>()).matmul(&pf.dense()).unwrap();
        let smin = svd(&a1p).unwrap().sigma_min_positive(DEFAULT_TOL_RANK);
        assert!((smin - 1.0).abs() < 1e-10);
        assert!((rep.sigma_min_plus_proj - 1.0).abs() < 1e-10);
        assert!(rep.scrk_rate <= rep.rk_rate);
    }

    #[test]
    fn horizon_cases() {
        let a = random(6, 3, 1);
        let zero = noisy_horizon(&a, &[0, 1], &[0.0; 6], DEFAULT_TOL_RANK).unwrap();
        assert_eq!((zero.gamma0, zero.gamma1), (0.0, 0.0));

        let r = [0.0, 0.0, 0.1, -0.2, 0.05, 0.3];
        let h = noisy_horizon(&a, &[0, 1], &r, DEFAULT_TOL_RANK).unwrap();
        assert_eq!(h.gamma0, 0.0);
        let pf = build_projector(&a.select_rows(&[0, 1]), DEFAULT_TOL_RANK).unwrap();
        let a1p = a.select_rows(&[2, 3, 4, 5]).matmul(&pf.dense()).unwrap();
        let smin = svd(&a1p).unwrap().sigma_min_positive(DEFAULT_TOL_RANK);
        let want = norm_sq(&r[2..]) / (smin * smin);
        assert!(rel(h.gamma1, want) < 1e-10);

        // mixed noise against a dense recomputation
        let r = [0.05, -0.1, 0.1, -0.2, 0.05, 0.3];
        let h = noisy_horizon(&a, &[0, 1], &r, DEFAULT_TOL_RANK).unwrap();
        let a0 = a.select_rows(&[0, 1]);
        let g = a0.matmul_t(&a0).unwrap();
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let ginv = DenseMatrix::from_rows(&[
            vec![g[(1, 1)] / det, -g[(0, 1)] / det],
            vec![-g[(1, 0)] / det, g[(0, 0)] / det],
        ])
        .unwrap();
        let pinv = a0.transpose().matmul(&ginv).unwrap();
        let shift = pinv.matvec(&r[..2]).unwrap();
        // σ_min(A_I0)² is the smaller eigenvalue of the 2x2 Gram matrix
        let tr = g[(0, 0)] + g[(1, 1)];
        let lam_min = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
        let g0 = 2.0 * norm_sq(&r[..2]) / lam_min - norm_sq(&shift);
        assert!(rel(h.gamma0, g0) < 1e-10);
        let resid: Vec<f64> = r[2..]
            .iter()
            .zip(a.select_rows(&[2, 3, 4, 5]).matvec(&shift).unwrap())
            .map(|(a, b)| a - b)
            .collect();
        assert!(rel(h.gamma1, norm_sq(&resid) / (smin * smin)) < 1e-10);

        let dup = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(noisy_horizon(&dup, &[0, 1], &[0.0; 3], DEFAULT_TOL_RANK).is_err());
    }

    #[test]
    fn coherence_cases() {
        let a = DenseMatrix::identity(4);
        let pf = build_projector(&a.select_rows(&[0]), DEFAULT_TOL_RANK).unwrap();
        assert_eq!(coherence_delta_sq(&a, &[0], &pf).unwrap(), 0.0);
        let rate = coherence_rate_bound(&a, &[0], &pf).unwrap();
        assert!((rate - 0.75).abs() < 1e-14);

        // unit trusted row i and unit a_j: ‖P a_j‖² = 1 - (a_iᵀ a_j)²
        let ai = [0.6, 0.8, 0.0];
        let aj = [0.0, 0.6, 0.8];
        let a = DenseMatrix::from_rows(&[ai.to_vec(), aj.to_vec(), vec![0.0, 0.0, 1.0]]).unwrap();
        let pf = build_projector(&a.select_rows(&[0]), DEFAULT_TOL_RANK).unwrap();
        let p = pf.project(&aj).unwrap();
        assert!((norm_sq(&p) - (1.0 - dot(&ai, &aj).powi(2))).abs() < 1e-14);

        // first m0 rows span U, the rest are (1 - ε) v_j + ε c_j
        let (n, m0, eps) = (8usize, 3usize, 0.1);
        let a = crate::problems::coherent_block_matrix(n, m0, eps, 9);
        let i0: Vec<usize> = (0..m0).collect();
        let pf = build_projector(&a.select_rows(&i0), DEFAULT_TOL_RANK).unwrap();
        let dense_p = pf.dense();
        let row_norm_sq = (1.0 - eps) * (1.0 - eps) + eps * eps;
        for j in m0..n {
            let pa = dense_p.matvec(a.row(j)).unwrap();
            assert!((norm_sq(&pa).sqrt() - eps).abs() < 1e-12);
            assert!((norm_sq(a.row(j)) - row_norm_sq).abs() < 1e-12);
        }
        let d2 = coherence_delta_sq(&a, &i0, &pf).unwrap();
        assert!((d2 - (1.0 - eps * eps / row_norm_sq)).abs() < 1e-12);

        let z = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let pf = build_projector(&z.select_rows(&[0]), DEFAULT_TOL_RANK).unwrap();
        assert!(matches!(coherence_delta_sq(&z, &[0], &pf), Err(Error::ZeroRow(1))));
    }
}
