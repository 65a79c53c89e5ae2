//! RK against SCRK on a coherent system (entries uniform on [0.9, 1.1]) for
//! a few trusted-block sizes.
//!
//! cargo run --release --example rk_vs_scrk

use scrk::analysis::scrk_rate_bound;
use scrk::linalg::DEFAULT_TOL_RANK;
use scrk::problems::{generate, Family, GeneratorSpec, TrustedRows};
use scrk::{run_solver, Method, SolverConfig};

fn main() -> scrk::Result<()> {
    let (m, n, iters) = (400, 100, 20_000);
    println!("{:>4}  {:>12} {:>12}  {:>10} {:>10}", "m0", "scrk rate", "rk rate", "SCRK err", "RK err");
    for m0 in [0, 5, 20, 50] {
        let spec = GeneratorSpec::new(Family::UniformEntries { lo: 0.9, hi: 1.1 }, m, n, 1)
            .trusted(TrustedRows::First(m0));
        let p = generate(&spec)?;
        let r = scrk_rate_bound(&p.a, &p.i0, DEFAULT_TOL_RANK)?;
        let s = run_solver(&p, &SolverConfig::new(Method::Scrk, iters).seed(7))?;
        let k = run_solver(&p, &SolverConfig::new(Method::Rk, iters).seed(7))?;
        println!(
            "{m0:>4}  {:>12.6} {:>12.6}  {:>10.2e} {:>10.2e}",
            r.scrk_rate,
            r.rk_rate,
            s.final_relative_error().unwrap_or(f64::NAN),
            k.final_relative_error().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
