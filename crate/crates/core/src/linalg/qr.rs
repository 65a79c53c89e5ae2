use super::matrix::{axpy, dot, norm, DenseMatrix};

/// Thin Householder QR of a matrix with `rows >= cols`.
///
/// Returns `(q, r)` with `q` of shape `rows x cols` (orthonormal columns)
/// and `r` upper triangular `cols x cols`, `a = q r`.
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "householder_qr needs rows >= cols, got {m}x{n}");
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let reflectors = triangularize(&mut cols);

    let r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { cols[j][i] } else { 0.0 });

    let mut q_cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        for col in q_cols.iter_mut() {
            reflect(v, &mut col[k..]);
        }
    }
    (DenseMatrix::from_columns(m, &q_cols), r)
}

/// Upper-triangular factor only.
pub fn householder_r(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    assert!(m >= n, "householder_r needs rows >= cols, got {m}x{n}");
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    triangularize(&mut cols);
    DenseMatrix::from_fn(n, n, |i, j| if i <= j { cols[j][i] } else { 0.0 })
}

// Reduces the columns in place; reflector k acts on entries k.. and is
// stored as a unit vector (or empty when the column is already zero).
fn triangularize(cols: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let n = cols.len();
    let mut reflectors = Vec::with_capacity(n);
    for k in 0..n {
        let x = &cols[k][k..];
        let nx = norm(x);
        if nx == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let nv = norm(&v);
        if nv == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|t| *t /= nv);
        for col in cols[k..].iter_mut() {
            reflect(&v, &mut col[k..]);
        }
        // clean the annihilated part exactly
        cols[k][k] = alpha;
        cols[k][k + 1..].iter_mut().for_each(|t| *t = 0.0);
        reflectors.push(v);
    }
    reflectors
}

#[inline]
fn reflect(v: &[f64], x: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let s = 2.0 * dot(v, x);
    axpy(-s, v, x);
}

/// Orthogonalizes `v` against the orthonormal `basis` with two passes of
/// modified Gram-Schmidt and returns its remaining norm.
pub(crate) fn orthogonalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
    norm(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_and_is_orthonormal() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, -1.0, 0.5],
            vec![1.0, 3.0, -2.0],
            vec![0.0, 1.0, 1.0],
            vec![4.0, 0.0, 2.0],
        ])
        .unwrap();
        let (q, r) = householder_qr(&a);
        assert!(q.matmul(&r).unwrap().max_abs_diff(&a) < 1e-13);
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(3)) < 1e-14);
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn qr_tolerates_zero_columns() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let (q, r) = householder_qr(&a);
        assert!(q.matmul(&r).unwrap().max_abs_diff(&a) < 1e-14);
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    }
}
