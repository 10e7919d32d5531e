use std::collections::HashMap;

use serde::Serialize;

use crate::geometry::Vec2;
use crate::grid::GridSpec;
use crate::motion::{derivative_phi_h, gradient_dphi_h, gradient_h, MotionModel};

/// Immersion determinant `IC(x, φ) = det [D_x H; D_x ∂_φ H]`.
pub fn immersion_determinant(model: &dyn MotionModel, phi: f64, x: Vec2) -> f64 {
    gradient_h(model, phi, x).cross(gradient_dphi_h(model, phi, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BolkerTolerances {
    /// `|IC|` must exceed this everywhere.
    pub ic_tol: f64,
    /// Absolute tolerance on `H` for a collision.
    pub h_tol: f64,
    /// Absolute tolerance on `∂_φ H` for a collision.
    pub dh_tol: f64,
    /// Colliding points closer than this count as the same point.
    pub x_sep: f64,
}

impl BolkerTolerances {
    /// `h_tol = 1e-6·s_max`, `dh_tol = 1e-6`, `x_sep` = two pixels.
    pub fn for_grid(grid: &GridSpec, s_max: f64) -> Self {
        BolkerTolerances {
            ic_tol: 1e-6,
            h_tol: 1e-6 * s_max,
            dh_tol: 1e-6,
            x_sep: 2.0 * grid.pixel_size(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectivityViolation {
    pub phi: f64,
    pub x1: Vec2,
    pub x2: Vec2,
}

#[derive(Debug, Clone, Serialize)]
pub struct BolkerReport {
    pub ic_min: f64,
    pub ic_max: f64,
    /// Smallest and largest signed IC; equal signs mean IC never crosses 0.
    pub ic_signed_range: (f64, f64),
    /// `IC` for every `(φ, x)` sample, φ-major.
    #[serde(skip)]
    pub ic_grid: Vec<f64>,
    pub n_phi: usize,
    pub n_x: usize,
    pub injectivity_violations: Vec<InjectivityViolation>,
    /// Violations found, including those beyond the stored list.
    pub n_violations: usize,
    pub passed: bool,
    pub summary: String,
}

/// Cap on stored violations; the total is still counted.
const MAX_STORED_VIOLATIONS: usize = 1000;

/// Samples the immersion determinant and looks for distinct points sharing
/// `(H, ∂_φ H)` at the same angle (bin hashing with neighbour lookup).
///
/// A passing report means no violation was found at this sampling
/// resolution; it does not prove injectivity.
pub fn check_bolker(
    model: &dyn MotionModel,
    x_grid: &[Vec2],
    phi_grid: &[f64],
    tol: &BolkerTolerances,
) -> BolkerReport {
    let per_phi = crate::par::map_range(phi_grid.len(), |k| {
        let phi = phi_grid[k];
        let mut ic = Vec::with_capacity(x_grid.len());
        let mut keys = Vec::with_capacity(x_grid.len());
        for &x in x_grid {
            ic.push(immersion_determinant(model, phi, x));
            keys.push((model.h(phi, x), derivative_phi_h(model, phi, x)));
        }
        (ic, collisions(phi, x_grid, &keys, tol))
    });

    let mut ic_grid = Vec::with_capacity(phi_grid.len() * x_grid.len());
    let mut violations = Vec::new();
    let mut n_violations = 0;
    for (ic, (count, found)) in per_phi {
        ic_grid.extend(ic);
        n_violations += count;
        for v in found {
            if violations.len() < MAX_STORED_VIOLATIONS {
                violations.push(v);
            }
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut ic_min = f64::INFINITY;
    let mut ic_max = 0.0f64;
    for &v in &ic_grid {
        // NaN must fail the check
        let a = if v.is_nan() { 0.0 } else { v.abs() };
        ic_min = ic_min.min(a);
        ic_max = ic_max.max(a);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if ic_grid.is_empty() {
        ic_min = 0.0;
    }

    let passed = ic_min > tol.ic_tol && n_violations == 0;
    let summary = if passed {
        format!(
            "immersion holds (min |IC| = {ic_min:.6e}); no injectivity violation found at this resolution"
        )
    } else if ic_min <= tol.ic_tol {
        format!(
            "immersion fails: min |IC| = {ic_min:.6e} <= {:e}; {n_violations} injectivity violation(s)",
            tol.ic_tol
        )
    } else {
        format!("{n_violations} injectivity violation(s) found")
    };

    BolkerReport {
        ic_min,
        ic_max,
        ic_signed_range: (lo, hi),
        ic_grid,
        n_phi: phi_grid.len(),
        n_x: x_grid.len(),
        injectivity_violations: violations,
        n_violations,
        passed,
        summary,
    }
}

fn collisions(
    phi: f64,
    xs: &[Vec2],
    keys: &[(f64, f64)],
    tol: &BolkerTolerances,
) -> (usize, Vec<InjectivityViolation>) {
    let bin = |(h, d): (f64, f64)| ((h / tol.h_tol).floor() as i64, (d / tol.dh_tol).floor() as i64);
    let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &k) in keys.iter().enumerate() {
        bins.entry(bin(k)).or_default().push(i);
    }
    let mut count = 0;
    let mut found = Vec::new();
    for (i, &k) in keys.iter().enumerate() {
        let (bh, bd) = bin(k);
        for dh in -1..=1 {
            for dd in -1..=1 {
                let Some(others) = bins.get(&(bh + dh, bd + dd)) else {
                    continue;
                };
                for &j in others {
                    // each unordered pair once
                    if j <= i {
                        continue;
                    }
                    let (h2, d2) = keys[j];
                    if (k.0 - h2).abs() < tol.h_tol
                        && (k.1 - d2).abs() < tol.dh_tol
                        && (xs[i] - xs[j]).norm() > tol.x_sep
                    {
                        count += 1;
                        if found.len() < MAX_STORED_VIOLATIONS {
                            found.push(InjectivityViolation {
                                phi,
                                x1: xs[i],
                                x2: xs[j],
                            });
                        }
                    }
                }
            }
        }
    }
    (count, found)
}
