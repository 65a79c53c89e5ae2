//! Spectral diagnostics for one instance: convergence rates, coherence,
//! uniform subset spectra and the corrupted-regime constant.
//!
//! cargo run --release --example spectral_report

use scrk::analysis::{corruption_bound, scrk_rate_bound, subset_max_frobenius, subset_min_singular, SubsetMode};
use scrk::linalg::{build_projector, DEFAULT_TOL_RANK};
use scrk::problems::{generate, Family, GeneratorSpec, TrustedRows};

fn main() -> scrk::Result<()> {
    let spec = GeneratorSpec::new(Family::NormalizedGaussianRows, 16, 4, 8).trusted(TrustedRows::First(1));
    let p = generate(&spec)?;
    let r = scrk_rate_bound(&p.a, &p.i0, DEFAULT_TOL_RANK)?;
    println!("{}", scrk::io::to_json_string(&r));
    let pf = build_projector(&p.a.select_rows(&p.i0), DEFAULT_TOL_RANK)?;
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let s = subset_min_singular(&p.a, &p.i0, &pf, alpha, SubsetMode::default())?;
        let z = subset_max_frobenius(&p.a, &p.i0, &pf, alpha)?;
        println!("alpha {alpha:.2}: {} subsets of {} rows, sigma_min+ {:.4}, Z {:.4}", s.subsets_evaluated, s.subset_size, s.value, z);
    }
    for (q, beta) in [(0.5, 0.05), (0.6, 0.1), (0.7, 0.2)] {
        let c = corruption_bound(&p.a, &p.i0, &pf, q, beta, SubsetMode::default())?;
        println!("q {q}, beta {beta}: C = {:.4e}, guaranteed {}", c.c_qb, c.converges_guaranteed);
    }
    Ok(())
}
