use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{line_angle_distance, Vec2};
use crate::grid::GridSpec;
use crate::motion::{check_angle, gradient_h, integration_curve, MotionModel};
use crate::operators::line_half_length;
use crate::phantom::SingularitySample;

use super::mapping::DEFAULT_SCAN_CELLS;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactOptions {
    /// End points of the data interval.
    pub phi_ends: Vec<f64>,
    /// A seed qualifies when `N(φ_end, x)` is within this angle of `±ξ`.
    pub art_tol: f64,
    /// Seeds at the same `φ_end` whose `s` values differ by less than this
    /// trace the same curve and are merged.
    pub dedupe_s: f64,
    /// Parameter step along the traced line, in pixels.
    pub step_px: f64,
}

impl ArtifactOptions {
    /// `φ_end ∈ {0, 2π}`, `art_tol` = one cell of the default φ scan,
    /// duplicates within half a pixel merged.
    pub fn for_grid(grid: &GridSpec) -> Self {
        ArtifactOptions {
            phi_ends: vec![0.0, TAU],
            art_tol: TAU / DEFAULT_SCAN_CELLS as f64,
            dedupe_s: 0.5 * grid.pixel_size(),
            step_px: 0.5,
        }
    }
}

/// A curve `C(φ_end, s)` along which the seed can spread an artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactCurve {
    pub phi_end: f64,
    pub s: f64,
    pub seed: SingularitySample,
    /// Samples of the curve inside the image square, in parameter order.
    pub points: Vec<Vec2>,
}

impl ArtifactCurve {
    /// Conormal direction `N(φ_end, x̃)` at point `k` (unnormalized).
    pub fn conormal_at(&self, model: &dyn MotionModel, k: usize) -> Vec2 {
        gradient_h(model, self.phi_end, self.points[k])
    }

    /// Largest distance of a point from the chord between the end points.
    pub fn sagitta(&self) -> f64 {
        sagitta(&self.points)
    }

    /// Direction angle of the end-to-end chord, in `[0, 2π)`.
    pub fn chord_angle(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(&a), Some(&b)) => (b - a).angle(),
            _ => 0.0,
        }
    }
}

/// Largest distance from the chord `points[0] → points[last]`.
pub fn sagitta(points: &[Vec2]) -> f64 {
    let (Some(&a), Some(&b)) = (points.first(), points.last()) else {
        return 0.0;
    };
    let chord = b - a;
    let len = chord.norm();
    if len == 0.0 {
        return points.iter().map(|&p| (p - a).norm()).fold(0.0, f64::max);
    }
    points
        .iter()
        .map(|&p| (p - a).cross(chord).abs() / len)
        .fold(0.0, f64::max)
}

/// For every seed whose direction is probed exactly at an end of the data
/// interval, traces `C(φ_end, H(φ_end, x))` across the image square.
pub fn artifact_curves(
    model: &dyn MotionModel,
    wavefront: &[SingularitySample],
    grid: &GridSpec,
    opts: &ArtifactOptions,
) -> Result<Vec<ArtifactCurve>> {
    let extent = grid.extent;
    let half = line_half_length(extent, 0.0);
    let n_points = ((2.0 * half / (opts.step_px * grid.pixel_size())).ceil() as usize + 1).max(2);

    let mut curves = Vec::new();
    for &phi_end in &opts.phi_ends {
        check_angle(model, phi_end)?;
        let mut seeds: Vec<(f64, &SingularitySample)> = wavefront
            .iter()
            .filter(|w| {
                let n = gradient_h(model, phi_end, w.x);
                line_angle_distance(n.angle(), w.xi_angle.angle()) <= opts.art_tol
            })
            .map(|w| (model.h(phi_end, w.x), w))
            .collect();
        seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut kept: Vec<(f64, &SingularitySample)> = Vec::new();
        for (s, w) in seeds {
            if kept.last().is_some_and(|&(prev, _)| s - prev < opts.dedupe_s) {
                continue;
            }
            kept.push((s, w));
        }

        let traced = crate::par::map_range(kept.len(), |k| {
            let (s, seed) = kept[k];
            integration_curve(model, phi_end, s, (-half, half), n_points).map(|pts| ArtifactCurve {
                phi_end,
                s,
                seed: *seed,
                points: pts
                    .into_iter()
                    .filter(|p| p.x.abs() <= extent && p.y.abs() <= extent)
                    .collect(),
            })
        });
        for c in traced {
            let c = c?;
            if c.points.len() >= 2 {
                curves.push(c);
            }
        }
    }
    Ok(curves)
}

/// Pixels whose centers lie within `radius` of some segment of some curve.
pub fn tube_mask(curves: &[ArtifactCurve], grid: &GridSpec, radius: f64) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    let (dx, dy) = (grid.dx(), grid.dy());
    let idx = |v: f64, d: f64, n: usize| -> isize {
        (((v + grid.extent) / d - 0.5).round() as isize).clamp(0, n as isize - 1)
    };
    for c in curves {
        for seg in c.points.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let ix0 = idx(a.x.min(b.x) - radius, dx, grid.nx);
            let ix1 = idx(a.x.max(b.x) + radius, dx, grid.nx);
            let iy0 = idx(a.y.min(b.y) - radius, dy, grid.ny);
            let iy1 = idx(a.y.max(b.y) + radius, dy, grid.ny);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let p = grid.center(ix as usize, iy as usize);
                    if point_segment_distance(p, a, b) <= radius {
                        mask[iy as usize * grid.nx + ix as usize] = true;
                    }
                }
            }
        }
    }
    mask
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{theta_perp, DirectionAngle};
    use crate::motion::{identity, third_rotation};

    fn grid() -> GridSpec {
        GridSpec::square(64, 1.0).unwrap()
    }

    #[test]
    fn static_curves_are_lines() {
        let seed = SingularitySample::new(Vec2::new(0.3, 0.1), DirectionAngle::new(0.0), 1.0);
        let curves = artifact_curves(&identity(), &[seed], &grid(), &ArtifactOptions::for_grid(&grid()))
            .unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!((c.s - 0.3).abs() < 1e-12);
            assert!(c.sagitta() < 1e-12);
            assert!(c.points.iter().all(|p| (p.x - 0.3).abs() < 1e-12));
            assert!(line_angle_distance(c.chord_angle(), theta_perp(0.0).angle()) < 1e-12);
        }
    }

    #[test]
    fn seeds_off_the_end_directions_are_ignored() {
        let seed = SingularitySample::new(Vec2::new(0.3, 0.1), DirectionAngle::new(1.0), 1.0);
        let curves =
            artifact_curves(&third_rotation(), &[seed], &grid(), &ArtifactOptions::for_grid(&grid()))
                .unwrap();
        assert!(curves.is_empty());
    }

    #[test]
    fn curve_points_are_level_set_points() {
        let m = third_rotation();
        let seed = SingularitySample::new(Vec2::new(0.1, 0.2), DirectionAngle::new(TAU / 3.0), 1.0);
        let curves = artifact_curves(&m, &[seed], &grid(), &ArtifactOptions::for_grid(&grid())).unwrap();
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert_eq!(c.phi_end, TAU);
        for p in &c.points {
            assert!((m.h(TAU, *p) - c.s).abs() < 1e-9);
        }
    }

    #[test]
    fn sagitta_of_an_arc() {
        let pts: Vec<Vec2> = (0..=100)
            .map(|k| crate::geometry::theta(k as f64 * 0.01))
            .collect();
        // chord over angle 1: sagitta = 1 - cos(1/2)
        assert!((sagitta(&pts) - (1.0 - 0.5f64.cos())).abs() < 1e-4);
    }

    #[test]
    fn tube_around_a_vertical_line() {
        let g = grid();
        let seed = SingularitySample::new(Vec2::new(0.0, 0.0), DirectionAngle::new(0.0), 1.0);
        let curves = artifact_curves(&identity(), &[seed], &g, &ArtifactOptions::for_grid(&g)).unwrap();
        let mask = tube_mask(&curves[..1], &g, 1.6 * g.pixel_size());
        // x = 0 sits between columns 31 and 32; centers within 1.6 px: 30..=33
        for iy in 0..64 {
            for ix in 0..64 {
                assert_eq!(mask[iy * 64 + ix], (30..=33).contains(&ix), "{ix},{iy}");
            }
        }
    }
}
