//! Quantile methods on a system with sparse large corruptions outside the
//! trusted block.
//!
//! cargo run --release --example corrupted_quantile

use scrk::problems::{add_corruptions, generate, CorruptionSpec, Family, GeneratorSpec, MagnitudeLaw, TrustedRows};
use scrk::{run_solver, Method, SolverConfig};

fn main() -> scrk::Result<()> {
    let cases = [(500, 50, 20, 100, 0.75, 0.75, 4_000), (130, 100, 75, 10, 0.8, 0.9, 10_000)];
    for (m, n, m0, c, q_scrk, q_rk, iters) in cases {
        let spec = GeneratorSpec::new(Family::NormalizedGaussianRows, m, n, 4).trusted(TrustedRows::Random(m0));
        let p = add_corruptions(
            &generate(&spec)?,
            &CorruptionSpec {
                count: c,
                magnitude: MagnitudeLaw::UniformSymmetric(1.0),
                seed: 5,
            },
        )?;
        let s = run_solver(&p, &SolverConfig::quantile(Method::QuantileScrk, q_scrk, iters).seed(1))?;
        let r = run_solver(&p, &SolverConfig::quantile(Method::QuantileRk, q_rk, iters).seed(1))?;
        println!(
            "{m}x{n}, m0 = {m0}, {c} corrupted rows: QuantileSCRK(q={q_scrk}) {:.2e}, QuantileRK(q={q_rk}) {:.2e}",
            s.final_relative_error().unwrap(),
            r.final_relative_error().unwrap()
        );
    }
    Ok(())
}
