//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the crate's SVD or projector code.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use scrk::rng::StreamRng;
use scrk::DenseMatrix;

pub fn gaussian(m: usize, n: usize, g: &mut StreamRng) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| StandardNormal.sample(g))
}

pub fn gaussian_vec(n: usize, g: &mut StreamRng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(g)).collect()
}

/// `k` distinct sorted indices from `0..m`.
pub fn subset(m: usize, k: usize, g: &mut StreamRng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = g.random_range(i..m);
        p.swap(i, j);
    }
    let mut s = p[..k].to_vec();
    s.sort_unstable();
    s
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| w[x][c].abs().total_cmp(&w[y][c].abs()))
            .unwrap();
        w.swap(c, p);
        let d = w[c][c];
        assert!(d != 0.0, "singular matrix");
        w[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = w[r][c];
                if f != 0.0 {
                    let pivot = w[c].clone();
                    w[r].iter_mut().zip(&pivot).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| w[i][n + j])
}

/// `Aᵀ (A Aᵀ)⁻¹` for full row rank `A`.
pub fn pinv_rows(a: &DenseMatrix) -> DenseMatrix {
    let g = a.matmul_t(a).unwrap();
    a.transpose().matmul(&inverse(&g)).unwrap()
}

/// `I - A0ᵀ (A0 A0ᵀ)⁻¹ A0` for full row rank `A0`.
pub fn null_projector(a0: &DenseMatrix) -> DenseMatrix {
    let n = a0.cols();
    if a0.rows() == 0 {
        return DenseMatrix::identity(n);
    }
    DenseMatrix::identity(n).sub(&pinv_rows(a0).matmul(a0).unwrap()).unwrap()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn sym_eigenvalues(s: &DenseMatrix) -> Vec<f64> {
    let n = s.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Smallest positive singular value of `m`, from the eigenvalues of the
/// smaller Gram matrix. Eigenvalues below `rel * λ_max` count as zero.
pub fn sigma_min_plus_via_gram(m: &DenseMatrix, rel: f64) -> f64 {
    let g = if m.rows() <= m.cols() {
        m.matmul_t(m).unwrap()
    } else {
        m.transpose().matmul(m).unwrap()
    };
    let ev = sym_eigenvalues(&g);
    let top = ev.first().copied().unwrap_or(0.0);
    ev.iter()
        .rev()
        .copied()
        .find(|&l| l > rel * top)
        .map_or(0.0, f64::sqrt)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

pub fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}
