//! SCRK on a noisy system settles at an error level predicted by the
//! horizon `γ0 + γ1`.
//!
//! cargo run --release --example noisy_horizon

use scrk::analysis::noisy_horizon;
use scrk::linalg::DEFAULT_TOL_RANK;
use scrk::problems::{add_noise, generate, Family, GeneratorSpec, NoiseLaw, TrustedRows};
use scrk::{Method, SolverConfig, SolverSetup};

fn main() -> scrk::Result<()> {
    let spec = GeneratorSpec::new(Family::NormalizedGaussianRows, 300, 100, 2).trusted(TrustedRows::First(25));
    let clean = generate(&spec)?;
    let cfg = SolverConfig::new(Method::Scrk, 20_000).record_every(2_000);
    let setup = SolverSetup::for_problem(&clean, &cfg)?;
    for a in [1e-4, 1e-3, 1e-2] {
        let p = add_noise(&clean, NoiseLaw::UniformSymmetric(a), false, 3)?;
        let h = noisy_horizon(&p.a, &p.i0, p.noise.as_deref().unwrap(), DEFAULT_TOL_RANK)?;
        let trials = 20;
        let tail: f64 = (0..trials)
            .map(|t| setup.run(&p, &cfg.clone().seed(t)).map(|tr| tr.final_record().error.unwrap().powi(2)))
            .sum::<scrk::Result<f64>>()?
            / trials as f64;
        println!(
            "noise U[-{a:e}, {a:e}]: mean final ||x - x*||^2 = {tail:.3e}, horizon = {:.3e} (gamma0 {:.2e}, gamma1 {:.2e})",
            h.horizon(),
            h.gamma0,
            h.gamma1
        );
    }
    Ok(())
}
