//! Dense kernels: matrix type, QR, Jacobi SVD, pseudoinverses and the
//! null-space projector of a trusted row block.

mod matrix;
mod projector;
mod qr;
mod svd;

pub use matrix::{axpy, dist, dot, norm, norm_sq, sub_vec, DenseMatrix};
pub use projector::{build_projector, projected_submatrix_svd, ProjectorFactorization};
pub use qr::householder_qr;
pub use svd::{numerical_rank, sigma_min_positive, singular_values, svd, SvdFactors, MAX_SWEEPS};

use crate::error::{Error, Result};

/// Default relative threshold for numerical rank.
pub const DEFAULT_TOL_RANK: f64 = 1e-10;

/// Moore-Penrose pseudoinverse, treating `sigma_i <= tol_rank * sigma_1` as zero.
pub fn pseudoinverse(a: &DenseMatrix, tol_rank: f64) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    let f = svd(a)?;
    let r = f.rank(tol_rank);
    // V_r diag(1/sigma) U_rᵀ
    let vs = DenseMatrix::from_fn(n, r, |i, j| f.vt[(j, i)] / f.sigma[j]);
    let ur = DenseMatrix::from_fn(m, r, |i, j| f.u[(i, j)]);
    vs.matmul_t(&ur)
}

/// Pseudoinverse of the stacked `[a_i; a_j]` assembled blockwise as
/// `[a_i† - (a_j P)† a_j a_i† | (a_j P)†]` with `P = I - a_i† a_i`.
///
/// The stack must have full row rank.
pub fn block_pseudoinverse(
    a_i: &DenseMatrix,
    a_j: &DenseMatrix,
    tol_rank: f64,
) -> Result<DenseMatrix> {
    if a_i.cols() != a_j.cols() {
        return Err(Error::dims(format!(
            "block_pseudoinverse: {} and {} columns",
            a_i.cols(),
            a_j.cols()
        )));
    }
    let stacked = a_i.vstack(a_j)?;
    let (m, n) = stacked.shape();
    let s = singular_values(&stacked)?;
    let full = m <= n && s.last().is_some_and(|&lo| lo > tol_rank * s[0]);
    if !full {
        return Err(Error::RankDeficient(format!(
            "stacked {m}x{n} block does not have full row rank"
        )));
    }
    let a_i_pinv = pseudoinverse(a_i, tol_rank)?;
    let p = DenseMatrix::identity(n).sub(&a_i_pinv.matmul(a_i)?)?;
    let ajp_pinv = pseudoinverse(&a_j.matmul(&p)?, tol_rank)?;
    let left = a_i_pinv.sub(&ajp_pinv.matmul(&a_j.matmul(&a_i_pinv)?)?)?;
    left.hstack(&ajp_pinv)
}
