use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::solvers::LinearProblem;

/// Modified Shepp-Logan table: intensity, semi-axes `(a, b)`, centre
/// `(x0, y0)` and rotation in degrees, on the square `[-1, 1]²`.
pub const SHEPP_LOGAN_ELLIPSES: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

/// `n x n` phantom sampled at pixel centres, row-major with row 0 at the
/// top. Values lie in `[0, 1]`.
pub fn shepp_logan(n: usize) -> Vec<f64> {
    let half = n as f64 / 2.0;
    let mut img = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            let x = (col as f64 + 0.5 - half) / half;
            let y = (half - row as f64 - 0.5) / half;
            let mut v = 0.0;
            for &[amp, a, b, x0, y0, deg] in &SHEPP_LOGAN_ELLIPSES {
                let (s, c) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * c + dy * s;
                let w = -dx * s + dy * c;
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += amp;
                }
            }
            // nested ellipses can cancel to a tiny negative value
            img[row * n + col] = v.max(0.0);
        }
    }
    img
}

/// Parallel-beam geometry on an `n_img x n_img` grid of unit pixels centred
/// at the origin. Rays are spaced one pixel apart and centred on the
/// detector; the ray at angle `θ` with offset `s` is
/// `{ s (cos θ, sin θ) + t (-sin θ, cos θ) }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtGeometry {
    pub n_img: usize,
    pub angles_deg: Vec<f64>,
    pub n_rays: usize,
}

impl CtGeometry {
    /// Angles `0, step, 2 step, ...` below 180 degrees.
    pub fn new(n_img: usize, angle_step_deg: f64, n_rays: usize) -> Result<Self> {
        if n_img < 8 {
            return Err(Error::InvalidGeometry(format!("image size {n_img} below 8")));
        }
        if !(angle_step_deg > 0.0 && angle_step_deg <= 180.0) {
            return Err(Error::InvalidGeometry(format!("angle step {angle_step_deg}")));
        }
        if n_rays == 0 {
            return Err(Error::InvalidGeometry("no rays".into()));
        }
        let count = (180.0 / angle_step_deg - 1e-9).ceil() as usize;
        let angles_deg = (0..count).map(|k| k as f64 * angle_step_deg).collect();
        Ok(Self {
            n_img,
            angles_deg,
            n_rays,
        })
    }

    /// Nonzero `(pixel, length)` pairs of one ray.
    pub fn ray(&self, angle_deg: f64, ray: usize) -> Vec<(usize, f64)> {
        let n = self.n_img;
        let half = n as f64 / 2.0;
        let offset = ray as f64 - (self.n_rays as f64 - 1.0) / 2.0;
        let (s, c) = angle_deg.to_radians().sin_cos();
        let (px, py) = (offset * c, offset * s);
        let (dx, dy) = (-s, c);
        let tiny = 1e-12;

        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for (p, d) in [(px, dx), (py, dy)] {
            if d.abs() < tiny {
                if p < -half || p > half {
                    return Vec::new();
                }
            } else {
                let (a, b) = ((-half - p) / d, (half - p) / d);
                t_lo = t_lo.max(a.min(b));
                t_hi = t_hi.min(a.max(b));
            }
        }
        if t_hi - t_lo <= tiny {
            return Vec::new();
        }

        let mut ts = vec![t_lo, t_hi];
        for (p, d) in [(px, dx), (py, dy)] {
            if d.abs() < tiny {
                continue;
            }
            for k in 0..=n {
                let t = (k as f64 - half - p) / d;
                if t > t_lo && t < t_hi {
                    ts.push(t);
                }
            }
        }
        ts.sort_unstable_by(f64::total_cmp);

        let mut out: Vec<(usize, f64)> = Vec::new();
        for w in ts.windows(2) {
            let len = w[1] - w[0];
            if len <= tiny {
                continue;
            }
            let tm = 0.5 * (w[0] + w[1]);
            let (x, y) = (px + tm * dx, py + tm * dy);
            let col = (x + half).floor();
            let row_from_bottom = (y + half).floor();
            if col < 0.0 || row_from_bottom < 0.0 || col >= n as f64 || row_from_bottom >= n as f64 {
                continue;
            }
            let pixel = (n - 1 - row_from_bottom as usize) * n + col as usize;
            match out.last_mut() {
                Some((p, l)) if *p == pixel => *l += len,
                _ => out.push((pixel, len)),
            }
        }
        out
    }

    /// Dense system matrix with one row per `(angle, ray)`, angle-major.
    pub fn matrix(&self) -> DenseMatrix {
        let n2 = self.n_img * self.n_img;
        let rows = self.angles_deg.len() * self.n_rays;
        let mut a = DenseMatrix::zeros(rows, n2);
        for (ai, &theta) in self.angles_deg.iter().enumerate() {
            for r in 0..self.n_rays {
                let row = a.row_mut(ai * self.n_rays + r);
                for (p, len) in self.ray(theta, r) {
                    row[p] += len;
                }
            }
        }
        a
    }
}

/// CT instance: `x*` is the phantom and `b = A x*`. Rays that miss the grid
/// are dropped; the original `(angle, ray)` row index of each kept row is
/// stored in the `row_map` row set. `seed` only enters through provenance.
pub fn ct_system(n_img: usize, angle_step_deg: f64, n_rays: usize, seed: u64) -> Result<LinearProblem> {
    let geom = CtGeometry::new(n_img, angle_step_deg, n_rays)?;
    let full = geom.matrix();
    let keep: Vec<usize> = (0..full.rows())
        .filter(|&i| full.row(i).iter().any(|&v| v != 0.0))
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidGeometry("no ray meets the grid".into()));
    }
    let a = full.select_rows(&keep);
    let x = shepp_logan(n_img);
    let mut p = LinearProblem::consistent(a, x, vec![])?;
    p.metadata.row_sets.insert("row_map".into(), keep);
    p.metadata.provenance = Some(serde_json::json!({
        "geometry": geom,
        "seed": seed,
    }));
    Ok(p)
}
