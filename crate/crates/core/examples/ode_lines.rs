//! Discretized `y'' = 0` with two inconsistent sets of initial conditions.
//! The quantile level decides which line QuantileSCRK settles on.
//!
//! cargo run --release --example ode_lines [-- --leading-block]

use scrk::problems::{ode_line_system, OdePlacement};
use scrk::{Method, SolverConfig, SolverSetup};

fn main() -> scrk::Result<()> {
    let placement = if std::env::args().any(|a| a == "--leading-block") {
        OdePlacement::leading_block()
    } else {
        OdePlacement::default()
    };
    let p = ode_line_system(&placement)?;
    let residual = |x: &[f64], set: &str| -> f64 {
        let rows = &p.metadata.row_sets[set];
        let ax = p.a.select_rows(rows).matvec(x).unwrap();
        rows.iter().zip(ax).map(|(&i, v)| (v - p.b[i]).powi(2)).sum::<f64>().sqrt()
    };
    for q in [0.3, 0.5, 0.65, 0.8] {
        let cfg = SolverConfig::quantile(Method::QuantileScrk, q, 10_000);
        let setup = SolverSetup::for_problem(&p, &cfg)?;
        let (mut l1, mut l2) = (0, 0);
        for t in 0..50 {
            let tr = setup.run(&p, &cfg.clone().seed(t))?;
            l1 += (residual(&tr.final_x, "line1") < 1e-3) as usize;
            l2 += (residual(&tr.final_x, "line2") < 1e-3) as usize;
        }
        println!("q = {q:.2}: {l1}/50 runs on line 1, {l2}/50 on line 2");
    }
    Ok(())
}
