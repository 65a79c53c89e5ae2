use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::{axpy, dot, DenseMatrix};
use super::qr::{householder_qr, orthogonalize_against};
use super::svd::{svd, SvdFactors};
use crate::error::{Error, Result};
use crate::rng;

/// Orthonormal basis `Q` (n x r) of the row space of a trusted block, giving
/// the projector onto its null space as `P v = v - Q (Qᵀ v)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectorFactorization {
    pub q_basis: DenseMatrix,
    pub rank: usize,
    pub tol_rank: f64,
    // basis vectors stored contiguously, one per row
    #[serde(skip)]
    qt: Option<DenseMatrix>,
}

impl PartialEq for ProjectorFactorization {
    fn eq(&self, other: &Self) -> bool {
        self.q_basis == other.q_basis && self.rank == other.rank && self.tol_rank == other.tol_rank
    }
}

impl ProjectorFactorization {
    /// Builds from an explicit orthonormal basis (n x r).
    pub fn from_basis(q_basis: DenseMatrix, tol_rank: f64) -> Self {
        let rank = q_basis.cols();
        let qt = Some(q_basis.transpose());
        Self {
            q_basis,
            rank,
            tol_rank,
            qt,
        }
    }

    /// Identity projector on `R^n`.
    pub fn identity(n: usize, tol_rank: f64) -> Self {
        Self::from_basis(DenseMatrix::zeros(n, 0), tol_rank)
    }

    pub fn dim(&self) -> usize {
        self.q_basis.rows()
    }

    fn basis_rows(&self) -> std::borrow::Cow<'_, DenseMatrix> {
        match &self.qt {
            Some(qt) => std::borrow::Cow::Borrowed(qt),
            None => std::borrow::Cow::Owned(self.q_basis.transpose()),
        }
    }

    /// `P v` in `O(rank * n)`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::dims(format!(
                "project: vector of length {} for dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = v.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// In-place `v <- P v`; the caller guarantees the length.
    pub fn project_in_place(&self, v: &mut [f64]) {
        let qt = self.basis_rows();
        for b in qt.row_iter() {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }

    /// Matrix whose rows are `P a_j` for the rows `a_j` of `a`, i.e. `a P`.
    pub fn project_rows(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.dim() {
            return Err(Error::dims(format!(
                "project_rows: {} columns for dimension {}",
                a.cols(),
                self.dim()
            )));
        }
        let mut out = a.clone();
        for i in 0..out.rows() {
            self.project_in_place(out.row_mut(i));
        }
        Ok(out)
    }

    /// Dense `P = I - Q Qᵀ`.
    pub fn dense(&self) -> DenseMatrix {
        let n = self.dim();
        let q = &self.q_basis;
        DenseMatrix::from_fn(n, n, |i, j| {
            let qq = dot(q.row(i), q.row(j));
            if i == j {
                1.0 - qq
            } else {
                -qq
            }
        })
    }

    /// Orthonormal basis (n x (n - r)) of the range of `P`.
    ///
    /// Completed from a QR of `[Q | G]` with `G` Gaussian drawn from seed 0,
    /// then re-orthonormalized against `Q`, so the result is deterministic.
    pub fn complement_basis(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        let r = self.rank;
        let k = n - r;
        let mut gen = rng::stream(0);
        let g = DenseMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut gen));
        let stacked = self.q_basis.hstack(&g)?;
        let (qfull, _) = householder_qr(&stacked);
        let mut basis: Vec<Vec<f64>> = (0..r).map(|j| self.q_basis.column(j)).collect();
        let mut out = Vec::with_capacity(k);
        for j in r..n {
            let mut c = qfull.column(j);
            let nc = orthogonalize_against(&mut c, &basis);
            if nc < 0.5 {
                return Err(Error::RankDeficient(
                    "complement completion lost orthogonality".into(),
                ));
            }
            c.iter_mut().for_each(|t| *t /= nc);
            basis.push(c.clone());
            out.push(c);
        }
        Ok(DenseMatrix::from_columns(n, &out))
    }
}

/// Projector onto the null space of `a_i0`, with the rank fixed by singular
/// values above `tol_rank * sigma_1`. An empty or zero block yields `P = I`.
pub fn build_projector(a_i0: &DenseMatrix, tol_rank: f64) -> Result<ProjectorFactorization> {
    let n = a_i0.cols();
    if a_i0.rows() == 0 {
        return Ok(ProjectorFactorization::identity(n, tol_rank));
    }
    let f = svd(a_i0)?;
    let r = f.rank(tol_rank);
    let q = DenseMatrix::from_fn(n, r, |i, j| f.vt[(j, i)]);
    Ok(ProjectorFactorization::from_basis(q, tol_rank))
}

/// SVD of `a_i1 Q̄`, whose nonzero spectrum is that of `a_i1 P` but computed
/// on the thinner `(m - m0) x (n - r)` matrix.
pub fn projected_submatrix_svd(
    a_i1: &DenseMatrix,
    pf: &ProjectorFactorization,
) -> Result<SvdFactors> {
    if a_i1.cols() != pf.dim() {
        return Err(Error::dims(format!(
            "projected_submatrix_svd: {} columns for dimension {}",
            a_i1.cols(),
            pf.dim()
        )));
    }
    let qbar = pf.complement_basis()?;
    svd(&a_i1.matmul(&qbar)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::norm;
    use crate::linalg::pseudoinverse;
    use rand::Rng;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut r = rng::stream(seed);
        DenseMatrix::from_fn(m, n, |_, _| r.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn coordinate_projector() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let pf = build_projector(&a, 1e-10).unwrap();
        let p = pf.project(&[3.0, -1.0, 2.0]).unwrap();
        assert!(p[0].abs() < 1e-15);
        assert!((p[1] + 1.0).abs() < 1e-15 && (p[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_block_is_identity() {
        let pf = build_projector(&DenseMatrix::zeros(0, 4), 1e-10).unwrap();
        assert_eq!(pf.rank, 0);
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(pf.project(&v).unwrap(), v);
        assert!(pf.project(&[1.0]).is_err());
    }

    #[test]
    fn matches_explicit_formula() {
        let a = random(2, 4, 5);
        let pf = build_projector(&a, 1e-10).unwrap();
        let pinv = pseudoinverse(&a, 1e-10).unwrap();
        let oracle = DenseMatrix::identity(4)
            .sub(&pinv.matmul(&a).unwrap())
            .unwrap();
        assert!(pf.dense().max_abs_diff(&oracle) <= 1e-10);

        let a5 = random(2, 5, 6);
        let pf5 = build_projector(&a5, 1e-10).unwrap();
        let p5 = DenseMatrix::identity(5)
            .sub(&pseudoinverse(&a5, 1e-10).unwrap().matmul(&a5).unwrap())
            .unwrap();
        let mut v = random(1, 5, 7).into_vec();
        let nv = norm(&v);
        v.iter_mut().for_each(|t| *t /= nv);
        let got = pf5.project(&v).unwrap();
        let want = p5.matvec(&v).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12);
        }
        for row in a5.row_iter() {
            assert!(norm(&pf5.project(row).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let a = random(2, 6, 8);
        let pf = build_projector(&a, 1e-10).unwrap();
        let qbar = pf.complement_basis().unwrap();
        assert_eq!(qbar.shape(), (6, 4));
        let g = qbar.transpose().matmul(&qbar).unwrap();
        assert!(g.max_abs_diff(&DenseMatrix::identity(4)) < 1e-12);
        let cross = pf.q_basis.transpose().matmul(&qbar).unwrap();
        assert!(cross.max_abs() < 1e-12);
    }

    #[test]
    fn projected_spectrum_matches_dense_product() {
        let a1 = random(6, 4, 9);
        let a0 = random(1, 4, 10);
        let pf = build_projector(&a0, 1e-10).unwrap();
        let thin = projected_submatrix_svd(&a1, &pf).unwrap();
        let dense = svd(&a1.matmul(&pf.dense()).unwrap()).unwrap();
        let r = thin.rank(1e-10);
        assert_eq!(r, dense.rank(1e-10));
        for i in 0..r {
            assert!((thin.sigma[i] - dense.sigma[i]).abs() <= 1e-8 * dense.sigma[0]);
        }

        let id = ProjectorFactorization::identity(4, 1e-10);
        let s = projected_submatrix_svd(&a1, &id).unwrap();
        let plain = svd(&a1).unwrap();
        for (x, y) in s.sigma.iter().zip(&plain.sigma) {
            assert!((x - y).abs() <= 1e-10);
        }

        let inside = random(3, 2, 11).matmul(&a0.vstack(&random(1, 4, 12)).unwrap()).unwrap();
        let pf2 = build_projector(&inside.select_rows(&[0, 1]), 1e-10).unwrap();
        let s = projected_submatrix_svd(&inside, &pf2).unwrap();
        assert!(s.sigma.iter().all(|&x| x <= 1e-10));
    }
}
