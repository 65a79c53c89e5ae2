use serde::{Deserialize, Serialize};

use super::matrix::{dot, norm_sq, DenseMatrix};
use super::qr::{householder_qr, householder_r, orthogonalize_against};
use crate::error::{Error, Result};

/// Sweep budget for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// Compact SVD `a = u diag(sigma) vt` with `k = min(rows, cols)` factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdFactors {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Smallest of the `min(rows, cols)` singular values.
    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol_rank * sigma_max`.
    pub fn rank(&self, tol_rank: f64) -> usize {
        numerical_rank(&self.sigma, tol_rank)
    }

    /// Smallest singular value above the rank threshold, 0 for a zero matrix.
    pub fn sigma_min_positive(&self, tol_rank: f64) -> f64 {
        sigma_min_positive(&self.sigma, tol_rank)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, k) = self.u.shape();
        let us = DenseMatrix::from_fn(m, k, |i, j| self.u[(i, j)] * self.sigma[j]);
        us.matmul(&self.vt).expect("factor shapes agree")
    }
}

pub fn numerical_rank(sigma: &[f64], tol_rank: f64) -> usize {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol_rank * s1).count()
}

pub fn sigma_min_positive(sigma: &[f64], tol_rank: f64) -> f64 {
    let r = numerical_rank(sigma, tol_rank);
    if r == 0 {
        0.0
    } else {
        sigma[r - 1]
    }
}

/// Compact SVD by one-sided (Hestenes) Jacobi.
///
/// Tall inputs are reduced by a Householder QR first; wide inputs are
/// handled through the transpose. Singular values are sorted descending and
/// each right singular vector has its first nonzero entry nonnegative.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.transpose())?;
        let mut out = SvdFactors {
            u: t.vt.transpose(),
            sigma: t.sigma,
            vt: t.u.transpose(),
        };
        fix_signs(&mut out);
        return Ok(out);
    }
    if n == 0 {
        return Ok(SvdFactors {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            vt: DenseMatrix::zeros(0, 0),
        });
    }
    let mut out = if m > n {
        let (q, r) = householder_qr(a);
        let inner = square_svd(&r)?;
        SvdFactors {
            u: q.matmul(&inner.u)?,
            sigma: inner.sigma,
            vt: inner.vt,
        }
    } else {
        square_svd(a)?
    };
    fix_signs(&mut out);
    Ok(out)
}

/// Singular values only, descending, `min(rows, cols)` of them.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m < n {
        return singular_values(&a.transpose());
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let work = if m > n { householder_r(a) } else { a.clone() };
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();
    jacobi(&mut cols, None)?;
    let mut s: Vec<f64> = cols.iter().map(|c| norm_sq(c).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn square_svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let n = a.cols();
    let m = a.rows();
    debug_assert_eq!(m, n);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let null_thresh = jacobi(&mut cols, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm_sq(c)).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j].sqrt()).collect();
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > null_thresh {
            let s = sigma[slot];
            u_cols.push(cols[j].iter().map(|t| t / s).collect());
        } else {
            u_cols.push(Vec::new());
            pending.push(slot);
        }
    }
    complete_basis(&mut u_cols, &pending, m);

    let vt = DenseMatrix::from_fn(n, n, |i, k| v[order[i]][k]);
    Ok(SvdFactors {
        u: DenseMatrix::from_columns(m, &u_cols),
        sigma,
        vt,
    })
}

// Rotates column pairs until all are mutually orthogonal to working
// precision. Returns the squared-norm threshold below which a column is
// treated as numerically zero.
fn jacobi(cols: &mut [Vec<f64>], mut v: Option<&mut Vec<Vec<f64>>>) -> Result<f64> {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    let fro_sq: f64 = cols.iter().map(|c| norm_sq(c)).sum();
    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();
    let null_thresh = fro_sq * (f64::EPSILON * f64::EPSILON) * 1e-4;
    if fro_sq == 0.0 {
        return Ok(0.0);
    }
    let mut norms: Vec<f64> = cols.iter().map(|c| norm_sq(c)).collect();
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= null_thresh || beta <= null_thresh {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cols, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, p, q, c, s);
                }
                norms[p] = norm_sq(&cols[p]);
                norms[q] = norm_sq(&cols[q]);
            }
        }
        if !rotated {
            return Ok(null_thresh);
        }
    }
    Err(Error::IterationFailure { sweeps: MAX_SWEEPS })
}

#[inline]
fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (x, y) = (&mut lo[p], &mut hi[0]);
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

// Fills the empty slots with unit vectors orthogonal to everything else,
// drawn from the standard basis in order.
fn complete_basis(cols: &mut [Vec<f64>], pending: &[usize], m: usize) {
    if pending.is_empty() {
        return;
    }
    let mut basis: Vec<Vec<f64>> = cols.iter().filter(|c| !c.is_empty()).cloned().collect();
    let mut next = 0;
    for &slot in pending {
        while next < m {
            let mut e = vec![0.0; m];
            e[next] = 1.0;
            next += 1;
            let r = orthogonalize_against(&mut e, &basis);
            if r > 0.5 {
                e.iter_mut().for_each(|t| *t /= r);
                basis.push(e.clone());
                cols[slot] = e;
                break;
            }
        }
    }
}

fn fix_signs(f: &mut SvdFactors) {
    let k = f.sigma.len();
    let n = f.vt.cols();
    let m = f.u.rows();
    for i in 0..k {
        let row = f.vt.row(i);
        let scale = row.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let lead = row.iter().find(|x| x.abs() > 1e-12 * scale).copied();
        if lead.is_some_and(|x| x < 0.0) {
            for j in 0..n {
                f.vt[(i, j)] = -f.vt[(i, j)];
            }
            for r in 0..m {
                f.u[(r, i)] = -f.u[(r, i)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut r = rng::stream(seed);
        DenseMatrix::from_fn(m, n, |_, _| r.random::<f64>() * 2.0 - 1.0)
    }

    fn check_invariants(a: &DenseMatrix, f: &SvdFactors) {
        let k = f.sigma.len();
        assert_eq!(k, a.rows().min(a.cols()));
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        let utu = f.u.transpose().matmul(&f.u).unwrap();
        assert!(utu.max_abs_diff(&DenseMatrix::identity(k)) <= 1e-10);
        let vvt = f.vt.matmul(&f.vt.transpose()).unwrap();
        assert!(vvt.max_abs_diff(&DenseMatrix::identity(k)) <= 1e-10);
        let err = f.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(err <= 1e-8 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn identity_and_diagonal() {
        let f = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0, 1.0]);
        let d = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = svd(&d).unwrap();
        assert_eq!(f.sigma, vec![3.0, 0.0]);
        check_invariants(&d, &f);
    }

    // Eigenvalues of a symmetric 3x3 via the trigonometric solution of the
    // characteristic cubic.
    fn sym3_eigenvalues(g: &DenseMatrix) -> [f64; 3] {
        let p1 = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
        let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
        let p2 = (g[(0, 0)] - q).powi(2) + (g[(1, 1)] - q).powi(2) + (g[(2, 2)] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = DenseMatrix::from_fn(3, 3, |i, j| {
            (g[(i, j)] - if i == j { q } else { 0.0 }) / p
        });
        let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
            - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
            + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
        let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn matches_gram_eigenvalues() {
        let a = random(5, 3, 11);
        let g = a.transpose().matmul(&a).unwrap();
        let eig = sym3_eigenvalues(&g);
        let f = svd(&a).unwrap();
        check_invariants(&a, &f);
        for (s, e) in f.sigma.iter().zip(eig) {
            assert!((s * s - e).abs() <= 1e-8 * e.abs(), "{s} vs {e}");
        }
        let s = singular_values(&a).unwrap();
        for (x, y) in s.iter().zip(&f.sigma) {
            assert!((x - y).abs() <= 1e-12 * f.sigma[0]);
        }
    }

    #[test]
    fn wide_rank_deficient_and_deterministic() {
        let b = random(2, 6, 3);
        let a = b.vstack(&b.scale(2.0)).unwrap().vstack(&random(1, 6, 4)).unwrap();
        let f = svd(&a).unwrap();
        check_invariants(&a, &f);
        assert_eq!(f.rank(1e-10), 3);
        assert_eq!(svd(&a).unwrap(), f);
        for i in 0..f.sigma.len() {
            let lead = f.vt.row(i).iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn zero_matrix() {
        let z = DenseMatrix::zeros(4, 3);
        let f = svd(&z).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        check_invariants(&z, &f);
    }
}
