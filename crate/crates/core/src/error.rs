use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    IterationFailure { sweeps: usize },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("row {0} has zero norm")]
    ZeroRow(usize),

    #[error("row {0} lies in the trusted row space (projected direction vanishes)")]
    DegenerateDirection(usize),

    #[error("all sampling weights are zero")]
    AllZeroWeights,

    #[error("no admissible row with a non-degenerate projected direction at iteration {iteration}")]
    NoAdmissibleRow { iteration: usize },

    #[error("every candidate row is degenerate; the quantile pool is empty")]
    EmptyPool,

    #[error("exact enumeration needs {needed:.3e} subsets, above the cap of {cap:.0}; use a sampled estimate")]
    CombinatorialBlowup { needed: f64, cap: f64 },

    #[error("quantile q = {q} and corruption rate beta = {beta} violate beta < q < 1 - beta")]
    InvalidQuantileBeta { q: f64, beta: f64 },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("cannot place {requested} corruptions on {available} untrusted rows")]
    TooManyCorruptions { requested: usize, available: usize },

    #[error("invalid CT geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
