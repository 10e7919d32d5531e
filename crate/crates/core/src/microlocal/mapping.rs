use std::f64::consts::TAU;

use serde::Serialize;

use crate::geometry::Vec2;
use crate::motion::{derivative_phi_h, gradient_h, MotionModel};
use crate::phantom::SingularitySample;

use super::bolker::immersion_determinant;

/// Cells of the uniform φ scan that brackets roots before bisection.
pub const DEFAULT_SCAN_CELLS: usize = 2048;
/// Bisection stops once the bracket is narrower than this (radians).
pub const ROOT_TOL: f64 = 1e-12;

/// Which signs of `σ` in `ξ = σ N(φ, x)` are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// `σ > 0`: `N` points along `ξ`.
    Positive,
    /// Any `σ ≠ 0`: `N` parallel or antiparallel to `ξ`.
    Both,
}

/// Closed φ interval searched for roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSearch {
    pub lo: f64,
    pub hi: f64,
    pub n_scan: usize,
    pub sign: SignMode,
}

impl PhiSearch {
    pub fn new(lo: f64, hi: f64, sign: SignMode) -> Self {
        PhiSearch {
            lo,
            hi,
            n_scan: DEFAULT_SCAN_CELLS,
            sign,
        }
    }

    /// The data interval `[0, 2π]`.
    pub fn data_interval(sign: SignMode) -> Self {
        PhiSearch::new(0.0, TAU, sign)
    }

    /// One period `[0, 2π)` for periodic models (the two ends are the same
    /// time), otherwise the open extension `(-ε, 2π + ε)`.
    pub fn full_domain(model: &dyn MotionModel, sign: SignMode) -> Self {
        if model.is_periodic() {
            // shrink the right end so φ = 2π is not counted twice
            PhiSearch::new(0.0, TAU * (1.0 - 1e-12), sign)
        } else {
            let e = model.epsilon() * (1.0 - 1e-9);
            PhiSearch::new(-e, TAU + e, sign)
        }
    }
}

/// Image of one object covector under the canonical relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataSingularity {
    pub phi: f64,
    pub s: f64,
    pub sigma: f64,
    /// `σ (ds − ∂_φ H dφ)` as `(η_φ, η_s) = (−σ ∂_φ H, σ)`.
    pub eta: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DataMapping {
    pub singularities: Vec<DataSingularity>,
    pub warnings: Vec<String>,
}

/// All angles in `search` at which `N(φ, x)` is parallel to `ξ`, with the
/// corresponding data covectors. An empty result means the covector is
/// invisible on the searched interval.
pub fn map_to_data(
    model: &dyn MotionModel,
    sample: &SingularitySample,
    search: &PhiSearch,
) -> Vec<DataSingularity> {
    map_to_data_diagnostics(model, sample, search).singularities
}

/// `map_to_data` plus warnings about roots the scan may not resolve and
/// points where the immersion condition fails.
pub fn map_to_data_diagnostics(
    model: &dyn MotionModel,
    sample: &SingularitySample,
    search: &PhiSearch,
) -> DataMapping {
    let x = sample.x;
    let xi = sample.xi();
    let mut warnings = Vec::new();
    let roots = conormal_roots(model, x, xi, search, &mut warnings);

    let mut singularities = Vec::with_capacity(roots.len());
    for phi in roots {
        let n = gradient_h(model, phi, x);
        let dot = n.dot(xi);
        if search.sign == SignMode::Positive && dot <= 0.0 {
            continue;
        }
        let sigma = dot.signum() / n.norm();
        let ic = immersion_determinant(model, phi, x);
        if !(ic.abs() > 1e-6) {
            warnings.push(format!(
                "immersion condition fails at φ = {phi:.6} (IC = {ic:e}); the mapping is not reliable"
            ));
        }
        let dphi = derivative_phi_h(model, phi, x);
        singularities.push(DataSingularity {
            phi,
            s: model.h(phi, x),
            sigma,
            eta: [-sigma * dphi, sigma],
        });
    }
    DataMapping {
        singularities,
        warnings,
    }
}

/// Zeros of `N(φ, x) × ξ` on the search interval, ascending. Each zero is
/// either parallel or antiparallel; callers filter by sign.
pub(crate) fn conormal_roots(
    model: &dyn MotionModel,
    x: Vec2,
    xi: Vec2,
    search: &PhiSearch,
    warnings: &mut Vec<String>,
) -> Vec<f64> {
    let n = search.n_scan.max(1);
    let step = (search.hi - search.lo) / n as f64;
    let f = |phi: f64| {
        let g = gradient_h(model, phi, x);
        g.cross(xi) / g.norm()
    };
    let nodes: Vec<f64> = (0..=n).map(|k| search.lo + k as f64 * step).collect();
    let vals: Vec<f64> = nodes.iter().map(|&p| f(p)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for k in 0..n {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            roots.push(nodes[k]);
            continue;
        }
        if k + 1 == n && b == 0.0 {
            roots.push(nodes[k + 1]);
            continue;
        }
        if a.signum() != b.signum() && b != 0.0 {
            roots.push(bisect(&f, nodes[k], nodes[k + 1], a));
        } else if k > 0
            && vals[k - 1].signum() == a.signum()
            && a.abs() < vals[k - 1].abs()
            && a.abs() < b.abs()
            && a.abs() < step
        {
            // a local minimum of |N × ξ| close to zero without a sign change
            warnings.push(format!(
                "possible tangential root near φ = {:.6} not resolved by the {n}-cell scan",
                nodes[k]
            ));
        }
    }
    roots.dedup_by(|b, a| (*b - *a).abs() < 1e-9);
    for w in roots.windows(2) {
        if w[1] - w[0] < step {
            warnings.push(format!(
                "roots at φ = {:.6} and {:.6} are closer than one scan cell",
                w[0], w[1]
            ));
        }
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let s_lo = f_lo.signum();
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessViolation {
    pub x: Vec2,
    pub xi_angle: f64,
    pub phis: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub n_samples: usize,
    pub n_unique: usize,
    /// Samples with no solution at all (invisible covectors).
    pub n_invisible: usize,
    pub fraction_unique: f64,
    pub violations: Vec<UniquenessViolation>,
    pub search: PhiSearch,
}

/// Counts, for every `(x, ξ)`, the angles in the model's whole domain with
/// `ξ = σ N(φ, x)`, `σ > 0`. Antipodal pairs `±ξ` are separate samples,
/// so each line direction is counted once per orientation. Covectors with
/// more than one solution violate the uniqueness condition.
pub fn check_uniqueness_condition(
    model: &dyn MotionModel,
    x_grid: &[Vec2],
    direction_grid: &[f64],
) -> UniquenessReport {
    let search = PhiSearch::full_domain(model, SignMode::Positive);
    let nd = direction_grid.len();
    let counts: Vec<Vec<f64>> = crate::par::map_range(x_grid.len() * nd, |k| {
        let x = x_grid[k / nd];
        let sample = SingularitySample::new(
            x,
            crate::geometry::DirectionAngle::new(direction_grid[k % nd]),
            1.0,
        );
        map_to_data(model, &sample, &search)
            .into_iter()
            .map(|d| d.phi)
            .collect()
    });

    let mut violations = Vec::new();
    let mut n_unique = 0;
    let mut n_invisible = 0;
    for (k, phis) in counts.into_iter().enumerate() {
        match phis.len() {
            0 => {
                n_invisible += 1;
                n_unique += 1;
            }
            1 => n_unique += 1,
            _ => violations.push(UniquenessViolation {
                x: x_grid[k / nd],
                xi_angle: direction_grid[k % nd],
                phis,
            }),
        }
    }
    let n_samples = x_grid.len() * nd;
    UniquenessReport {
        n_samples,
        n_unique,
        n_invisible,
        fraction_unique: if n_samples == 0 {
            1.0
        } else {
            n_unique as f64 / n_samples as f64
        },
        violations,
        search,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DirectionAngle;
    use crate::motion::{counter_rotation, identity, third_rotation};
    use std::f64::consts::PI;

    fn sample(x: Vec2, angle: f64) -> SingularitySample {
        SingularitySample::new(x, DirectionAngle::new(angle), 1.0)
    }

    #[test]
    fn counter_rotation_double_cover() {
        let m = counter_rotation();
        let r = map_to_data(
            &m,
            &sample(Vec2::new(0.3, -0.2), PI),
            &PhiSearch::data_interval(SignMode::Positive),
        );
        let phis: Vec<f64> = r.iter().map(|d| d.phi).collect();
        assert_eq!(phis.len(), 2, "{phis:?}");
        assert!((phis[0] - PI / 2.0).abs() < 1e-8);
        assert!((phis[1] - 3.0 * PI / 2.0).abs() < 1e-8);
        for d in &r {
            assert!(d.sigma > 0.0);
            assert_eq!(d.eta[1], d.sigma);
        }
    }

    #[test]
    fn third_rotation_invisible_direction() {
        let m = third_rotation();
        for sign in [SignMode::Positive, SignMode::Both] {
            let r = map_to_data(&m, &sample(Vec2::new(0.1, 0.4), 5.0 * PI / 6.0), &PhiSearch::data_interval(sign));
            assert!(r.is_empty());
        }
    }

    #[test]
    fn identity_gives_the_antipodal_pair() {
        let a = 1.0;
        let r = map_to_data(
            &identity(),
            &sample(Vec2::new(-0.5, 0.25), a),
            &PhiSearch::data_interval(SignMode::Both),
        );
        assert_eq!(r.len(), 2);
        assert!((r[0].phi - a).abs() < 1e-9 && r[0].sigma > 0.0);
        assert!((r[1].phi - (a + PI)).abs() < 1e-9 && r[1].sigma < 0.0);
        // s = x · θ(φ)
        assert!((r[0].s - Vec2::new(-0.5, 0.25).dot(crate::geometry::theta(a))).abs() < 1e-9);
        assert!((r[0].s + r[1].s).abs() < 1e-9);
    }

    #[test]
    fn uniqueness_counts() {
        let xs = [Vec2::new(0.2, 0.1), Vec2::new(-0.4, 0.5)];
        let dirs: Vec<f64> = (0..24).map(|k| 0.01 + k as f64 * TAU / 24.0).collect();
        let u = check_uniqueness_condition(&third_rotation(), &xs, &dirs);
        assert!(u.violations.is_empty());
        assert!(u.n_invisible > 0);
        let u = check_uniqueness_condition(&counter_rotation(), &xs, &dirs);
        assert_eq!(u.violations.len(), u.n_samples);
        assert!(u.violations.iter().all(|v| v.phis.len() == 2));
        let u = check_uniqueness_condition(&identity(), &xs, &dirs);
        assert_eq!(u.fraction_unique, 1.0);
        assert_eq!(u.n_invisible, 0);
    }
}
