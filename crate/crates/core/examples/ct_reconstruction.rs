//! Parallel-beam CT of the Shepp-Logan phantom with a quarter of the
//! untrusted measurements corrupted. Writes PGM images to the given
//! directory (default `ct-out`).
//!
//! cargo run --release --example ct_reconstruction -- ct-out

use std::fs;
use std::path::Path;

use scrk::problems::{add_corruptions, ct_system, CorruptionSpec, MagnitudeLaw};
use scrk::rng::stream;
use scrk::{run_solver, Method, SolverConfig};

fn write_pgm(path: &Path, img: &[f64], n: usize) -> std::io::Result<()> {
    let hi = img.iter().cloned().fold(1e-12, f64::max);
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(img.iter().map(|v| (255.0 * (v / hi).clamp(0.0, 1.0)).round() as u8));
    fs::write(path, out)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "ct-out".into());
    let dir = Path::new(&dir);
    fs::create_dir_all(dir)?;
    let n_img = 25;
    let mut p = ct_system(n_img, 2.0, 25, 0)?;
    let m = p.m();
    let mut g = stream(9);
    let mut rows: Vec<usize> = (0..m).collect();
    for i in 0..m / 9 {
        let j = rand::Rng::random_range(&mut g, i..m);
        rows.swap(i, j);
    }
    p.i0 = rows[..m / 9].to_vec();
    p.i0.sort_unstable();
    let count = (m - p.i0.len()) / 4;
    let p = add_corruptions(&p, &CorruptionSpec { count, magnitude: MagnitudeLaw::UniformRange(2.0, 6.0), seed: 1 })?;
    let truth = p.x_star.clone().unwrap();
    write_pgm(&dir.join("phantom.pgm"), &truth, n_img)?;
    for method in [Method::QuantileScrk, Method::QuantileRk] {
        let cfg = SolverConfig::quantile(method, 0.7, 60 * m).record_every(6 * m).seed(2);
        let tr = run_solver(&p, &cfg)?;
        println!("{method}: image error {:.3}", tr.final_distance_to(&truth));
        write_pgm(&dir.join(format!("{}.pgm", method.name())), &tr.final_x, n_img)?;
    }
    println!("images in {}", dir.display());
    Ok(())
}
