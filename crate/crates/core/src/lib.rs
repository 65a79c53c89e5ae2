//! Randomized Kaczmarz solvers whose iterates are confined to the solution
//! space of a trusted block of equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense kernels (SVD, pseudoinverse, the null-space projector
//!   of the trusted block and the block-pseudoinverse identity).
//! - [`solvers`]: RK, SCRK, QuantileRK and QuantileSCRK, the row samplers and
//!   quantile thresholds they use, and the convergence trace.
//! - [`analysis`]: rate bounds, noisy error horizons, coherence bounds,
//!   subset spectra and the deterministic contraction constant for the
//!   corrupted regime, plus leverage-score subset sampling.
//! - [`problems`]: instance generators (random families, structured
//!   coherent constructions, the ODE line system and a parallel-beam CT
//!   system) together with noise and corruption injection.
//! - [`io`]: Matrix Market, JSON sidecars and CSV traces.
//! - [`cli`]: the `generate | solve | experiment | analyze` harness behind
//!   the `scrk` binary.
//!
//! Row indices are 0-based everywhere. `I0` is the trusted row set and `I1`
//! its complement.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, ProjectorFactorization, SvdFactors};
pub use solvers::{
    run_solver, ConvergenceTrace, LinearProblem, Method, Sampling, SolverConfig, SolverSetup,
};
