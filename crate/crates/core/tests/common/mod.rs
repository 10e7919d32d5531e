//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use dynaray::{GridSpec, ImageGrid, Sinogram, Vec2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Band-limited ramp applied by direct summation,
/// `out[j] = Δs Σ_k row[k] h(j − k)` with `h(0) = 2π/(4Δs²)`,
/// `h(m) = −2π/(π² m² Δs²)` for odd `m` and 0 for even `m ≠ 0`.
pub fn ram_lak_direct(row: &[f64], ds: f64) -> Vec<f64> {
    let n = row.len() as isize;
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for k in 0..n {
                let m = j - k;
                let h = if m == 0 {
                    PI / (2.0 * ds * ds)
                } else if m % 2 != 0 {
                    -2.0 / (PI * (m * m) as f64 * ds * ds)
                } else {
                    0.0
                };
                acc += row[k as usize] * h;
            }
            acc * ds
        })
        .collect()
}

/// Textbook parallel-beam FBP over a full turn: direct-summation Ram-Lak,
/// backprojection at `s = x · θ(φ)` with the library's linear interpolation
/// in `s`, trapezoid rule in φ, factor `1/(4π)`.
pub fn classical_fbp(g: &Sinogram, grid: GridSpec) -> ImageGrid {
    let spec = g.spec();
    let ds = spec.ds();
    let mut filtered = Vec::with_capacity(spec.len());
    for i in 0..spec.n_phi {
        filtered.extend(ram_lak_direct(g.row(i), ds));
    }
    let filtered = Sinogram::from_values(spec, filtered).unwrap();
    let dphi = spec.dphi();
    let mut values = Vec::with_capacity(grid.len());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let x = grid.center(ix, iy);
            let mut acc = 0.0;
            for i in 0..spec.n_phi {
                let phi = spec.phi(i);
                let w = if i == 0 || i == spec.n_phi - 1 { 0.5 } else { 1.0 };
                let s = x.x * phi.cos() + x.y * phi.sin();
                acc += w * filtered.linear_sample_s(i, s).unwrap();
            }
            values.push(acc * dphi / (4.0 * PI));
        }
    }
    ImageGrid::from_values(grid, values).unwrap()
}

/// Sum of a few random Gaussian bumps inside radius `r`.
pub fn random_bumps(rng: &mut impl Rng, n: usize, r: f64) -> Vec<(Vec2, f64, f64)> {
    (0..n)
        .map(|_| {
            let rho = r * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..2.0 * PI);
            let c = Vec2::new(rho * a.cos(), rho * a.sin());
            (c, rng.gen_range(0.08..0.2), rng.gen_range(-1.0..1.0))
        })
        .collect()
}

pub fn eval_bumps(bumps: &[(Vec2, f64, f64)], p: Vec2) -> f64 {
    bumps
        .iter()
        .map(|&(c, w, a)| a * (-(p - c).dot(p - c) / (2.0 * w * w)).exp())
        .sum()
}

/// Inner product of two images with the pixel-area weight.
pub fn image_dot(a: &ImageGrid, b: &ImageGrid) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * a.spec().pixel_area()
}

/// Inner product of two full-turn sinograms: trapezoid in `s`, and in φ
/// the periodic rule (end rows share one weight).
pub fn sinogram_dot(a: &Sinogram, b: &Sinogram) -> f64 {
    let spec = a.spec();
    let mut acc = 0.0;
    for i in 0..spec.n_phi {
        let wi = if i == 0 || i == spec.n_phi - 1 { 0.5 } else { 1.0 };
        for j in 0..spec.n_s {
            let wj = if j == 0 || j == spec.n_s - 1 { 0.5 } else { 1.0 };
            acc += wi * wj * a.get(i, j) * b.get(i, j);
        }
    }
    acc * spec.dphi() * spec.ds()
}

pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
