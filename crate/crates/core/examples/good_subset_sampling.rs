//! Picking the trusted block by sampling rows (by norm or by leverage
//! score) when the source of coherence is unknown.
//!
//! cargo run --release --example good_subset_sampling

use scrk::analysis::{sample_good_subset, scrk_rate_bound, SubsetScheme};
use scrk::linalg::{build_projector, norm_sq, singular_values, DEFAULT_TOL_RANK};
use scrk::problems::{generate, Family, GeneratorSpec};
use scrk::rng::stream;
use scrk::{run_solver, Method, SolverConfig};

fn main() -> scrk::Result<()> {
    let r = 20;
    let p = generate(&GeneratorSpec::new(Family::LowRankCoherent { r, epsilon: 0.1 }, 500, 200, 6))?;
    let s = singular_values(&p.a)?;
    let head: f64 = s[..r].iter().map(|v| v * v).sum();
    let tail: f64 = s[r..].iter().map(|v| v * v).sum();
    println!("||A||_F^2 = {:.2}: top {r} carry {head:.2}, tail {tail:.2}", head + tail);
    for scheme in [SubsetScheme::NormSampling, SubsetScheme::LeverageSampling] {
        let i0 = sample_good_subset(&p.a, r, 5 * r, scheme, &mut stream(1))?;
        let pf = build_projector(&p.a.select_rows(&i0), DEFAULT_TOL_RANK)?;
        let ap = norm_sq(pf.project_rows(&p.a)?.as_slice());
        let rates = scrk_rate_bound(&p.a, &i0, DEFAULT_TOL_RANK)?;
        let q = p.clone().with_i0(i0)?;
        let tr = run_solver(&q, &SolverConfig::new(Method::Scrk, 20_000).seed(3))?;
        println!(
            "{scheme:?}: {} distinct rows, ||AP||_F^2 = {ap:.3}, scrk rate {:.6} (rk {:.8}), error after 20000 its {:.2e}",
            q.i0.len(),
            rates.scrk_rate,
            rates.rk_rate,
            tr.final_relative_error().unwrap()
        );
    }
    Ok(())
}
