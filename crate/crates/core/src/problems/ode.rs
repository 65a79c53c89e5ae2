use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::solvers::LinearProblem;

const GRID: usize = 100;

/// Grid points (x = 0..99) carrying the initial conditions of each line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdePlacement {
    pub line1: Vec<usize>,
    pub line2: Vec<usize>,
}

impl Default for OdePlacement {
    /// Line 1 spread over the whole grid, Line 2 clustered in the middle.
    fn default() -> Self {
        Self {
            line1: (0..10).map(|i| 11 * i).collect(),
            line2: vec![40, 45, 50, 55, 60],
        }
    }
}

impl OdePlacement {
    /// Line 1 on x = 0..9, Line 2 on x = 10..14.
    pub fn leading_block() -> Self {
        Self {
            line1: (0..10).collect(),
            line2: (10..15).collect(),
        }
    }
}

fn line1(x: f64) -> f64 {
    x
}

fn line2(x: f64) -> f64 {
    25.0 - x / 2.0
}

/// Second-difference discretization of `y'' = 0` on 100 points (the trusted
/// 98 rows) followed by indicator rows for the Line 1 conditions `y = x`
/// and the Line 2 conditions `y = 25 - x/2`. Every row has unit norm.
///
/// There is no `x*`; the two candidate solutions are stored as metadata
/// vectors `line1`/`line2` and their condition rows as row sets.
pub fn ode_line_system(placement: &OdePlacement) -> Result<LinearProblem> {
    if placement.line1.is_empty() && placement.line2.is_empty() {
        return Err(Error::InvalidSpec("no initial conditions".into()));
    }
    if let Some(&x) = placement.line1.iter().chain(&placement.line2).find(|&&x| x >= GRID) {
        return Err(Error::InvalidSpec(format!("condition at x = {x} is off the grid")));
    }
    let n = GRID;
    let diff = 1.0 / 6f64.sqrt();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..n - 2 {
        let mut r = vec![0.0; n];
        r[i] = diff;
        r[i + 1] = -2.0 * diff;
        r[i + 2] = diff;
        rows.push(r);
        b.push(0.0);
    }
    let mut sets = [Vec::new(), Vec::new()];
    for (k, (xs, f)) in [(&placement.line1, line1 as fn(f64) -> f64), (&placement.line2, line2)]
        .into_iter()
        .enumerate()
    {
        for &x in xs {
            let mut r = vec![0.0; n];
            r[x] = 1.0;
            sets[k].push(rows.len());
            rows.push(r);
            b.push(f(x as f64));
        }
    }
    let a = DenseMatrix::from_rows(&rows)?;
    let mut p = LinearProblem::new(a, b, (0..n - 2).collect())?;
    let grid: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let [s1, s2] = sets;
    p.metadata.row_sets.insert("line1".into(), s1);
    p.metadata.row_sets.insert("line2".into(), s2);
    p.metadata.vectors.insert("line1".into(), grid.iter().map(|&x| line1(x)).collect());
    p.metadata.vectors.insert("line2".into(), grid.iter().map(|&x| line2(x)).collect());
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, norm_sq};

    #[test]
    fn structure() {
        let p = ode_line_system(&OdePlacement::default()).unwrap();
        assert_eq!(p.a.shape(), (113, 100));
        assert_eq!(p.i0.len(), 98);
        assert!(p.x_star.is_none());
        assert!(p.a.row_norms_sq().iter().all(|v| (v - 1.0).abs() < 1e-14));

        let ramp: Vec<f64> = (0..100).map(|i| 0.5 * i as f64 + 1.0).collect();
        let top = p.a.select_rows(&p.i0).matvec(&ramp).unwrap();
        assert!(norm_sq(&top).sqrt() < 1e-12);

        for (name, count) in [("line1", 10), ("line2", 5)] {
            let rows = &p.metadata.row_sets[name];
            assert_eq!(rows.len(), count);
            let v = &p.metadata.vectors[name];
            let lhs = p.a.select_rows(rows).matvec(v).unwrap();
            let rhs: Vec<f64> = rows.iter().map(|&r| p.b[r]).collect();
            assert_eq!(dist(&lhs, &rhs), 0.0);
        }
    }

    #[test]
    fn placement_is_validated() {
        let bad = OdePlacement {
            line1: vec![100],
            line2: vec![],
        };
        assert!(ode_line_system(&bad).is_err());
        let p = ode_line_system(&OdePlacement::leading_block()).unwrap();
        assert_eq!(p.metadata.row_sets["line2"], (108..113).collect::<Vec<_>>());
    }
}
