//! Reading and writing problems, results and traces.
//!
//! A problem bundle is a directory holding `matrix.mtx` (Matrix Market) and
//! `problem.json`, a sidecar with `b`, `x*`, the trusted rows and whatever
//! else the generator recorded. Indices in the sidecar are 0-based.

mod csv;
mod mtx;

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use csv::{
    aggregate_relative_errors, empirical_quantile, format_aggregate_csv, format_trace_csv,
    write_aggregate_csv, write_trace_csv, AggregateRow, AGGREGATE_HEADER, TRACE_HEADER,
};
pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market, ARRAY_HEADER};

use crate::error::{Error, Result};
use crate::solvers::{LinearProblem, ProblemMetadata};

pub const SCHEMA: &str = "scrk/1";
pub const MATRIX_FILE: &str = "matrix.mtx";
pub const SIDECAR_FILE: &str = "problem.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: String,
    /// Matrix file name, relative to the bundle directory.
    pub matrix: String,
    pub m: usize,
    pub n: usize,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default)]
    pub i0: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption_support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<f64>>,
    #[serde(default)]
    pub metadata: ProblemMetadata,
}

/// Writes `dir/matrix.mtx` and `dir/problem.json`, creating `dir`.
pub fn save_problem(problem: &LinearProblem, dir: &Path) -> Result<()> {
    problem.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_market(&problem.a, &dir.join(MATRIX_FILE))?;
    let sidecar = Sidecar {
        schema: SCHEMA.into(),
        matrix: MATRIX_FILE.into(),
        m: problem.m(),
        n: problem.n(),
        b: problem.b.clone(),
        x_star: problem.x_star.clone(),
        i0: problem.i0.clone(),
        corruption_support: problem.corruption_support.clone(),
        noise: problem.noise.clone(),
        metadata: problem.metadata.clone(),
    };
    write_json(&sidecar, &dir.join(SIDECAR_FILE))
}

/// Loads a bundle directory, or a sidecar file given directly.
pub fn load_problem(path: &Path) -> Result<LinearProblem> {
    let (dir, sidecar_path) = if path.is_dir() {
        (path.to_path_buf(), path.join(SIDECAR_FILE))
    } else {
        let parent = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        (parent, path.to_path_buf())
    };
    let s: Sidecar = read_json(&sidecar_path)?;
    if s.schema != SCHEMA {
        return Err(Error::Parse {
            path: sidecar_path,
            line: 1,
            reason: format!("schema {:?}, expected {SCHEMA:?}", s.schema),
        });
    }
    let a = read_matrix_market(&dir.join(&s.matrix))?;
    if a.shape() != (s.m, s.n) {
        return Err(Error::dims(format!(
            "matrix is {}x{} but the sidecar says {}x{}",
            a.rows(),
            a.cols(),
            s.m,
            s.n
        )));
    }
    let p = LinearProblem {
        a,
        b: s.b,
        x_star: s.x_star,
        i0: s.i0,
        corruption_support: s.corruption_support,
        noise: s.noise,
        metadata: s.metadata,
    };
    p.validate()?;
    Ok(p)
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = to_json_string(value);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = LinearProblem::consistent(DenseMatrix::identity(3), vec![0.1, -2.0, 1e-17], vec![0, 2]).unwrap();
        p.metadata.vectors.insert("v".into(), vec![1.0 / 3.0]);
        save_problem(&p, dir.path()).unwrap();
        let q = load_problem(dir.path()).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.i1(), vec![1]);
        assert_eq!(load_problem(&dir.path().join(SIDECAR_FILE)).unwrap(), p);
    }

    #[test]
    fn mismatched_sidecar_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = LinearProblem::consistent(DenseMatrix::identity(2), vec![1.0, 2.0], vec![]).unwrap();
        save_problem(&p, dir.path()).unwrap();
        write_matrix_market(&DenseMatrix::identity(3), &dir.path().join(MATRIX_FILE)).unwrap();
        assert!(matches!(load_problem(dir.path()), Err(Error::DimensionMismatch(_))));
        let missing = dir.path().join("nope");
        assert!(matches!(load_problem(&missing), Err(Error::Io { .. })));
    }
}
