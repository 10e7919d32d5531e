use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, wrap_angle, Vec2};
use crate::motion::{check_angle, gradient_h, MotionModel};

/// Gaps between arcs up to this size (radians) are closed when merging.
const MERGE_TOL: f64 = 1e-12;

/// Directions swept at one point by `±N(φ, x)/|N|` for φ in the
/// acquisition set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub x: Vec2,
    /// Disjoint closed intervals `[a, b] ⊂ [0, 2π]`, ascending. An arc
    /// through angle 0 is split into `[a, 2π]` and `[0, b]`.
    pub visible: Vec<[f64; 2]>,
    /// Complement of `visible` in `[0, 2π]`, same conventions.
    pub invisible: Vec<[f64; 2]>,
    /// `±N` at the ends of the acquisition intervals.
    pub boundary_angles: Vec<f64>,
    /// Oriented sweeps of `+N` only (start, length), before mirroring.
    #[serde(skip)]
    pub sweeps: Vec<(f64, f64)>,
}

impl VisibilityReport {
    /// Whether the direction `angle` lies in a visible interval.
    pub fn is_visible(&self, angle: f64) -> bool {
        let a = wrap_angle(angle);
        self.visible.iter().any(|&[lo, hi]| a >= lo && a <= hi)
    }

    /// Angular distance from `angle` to the nearest interval end point
    /// between visible and invisible directions (∞ if there is none).
    pub fn distance_to_edge(&self, angle: f64) -> f64 {
        let a = wrap_angle(angle);
        let mut best = f64::INFINITY;
        let full = self.visible.len() == 1 && self.visible[0] == [0.0, TAU];
        if full || self.visible.is_empty() {
            return best;
        }
        for &[lo, hi] in &self.visible {
            for e in [lo, hi] {
                // a split arc's 0 / 2π ends are not real edges
                if (e == 0.0 || e == TAU) && self.covers_wrap() {
                    continue;
                }
                best = best.min(angle_diff(a, e).abs());
            }
        }
        best
    }

    fn covers_wrap(&self) -> bool {
        let starts = self.visible.first().is_some_and(|v| v[0] == 0.0);
        let ends = self.visible.last().is_some_and(|v| v[1] == TAU);
        starts && ends
    }

    /// How many times `+N` sweeps over `angle` (orientation kept).
    pub fn multiplicity(&self, angle: f64) -> usize {
        let a = wrap_angle(angle);
        self.sweeps
            .iter()
            .filter(|&&(start, len)| {
                let d = wrap_angle(a - start);
                d <= len || (TAU - d) < MERGE_TOL
            })
            .count()
    }

    /// Total visible angle, in radians.
    pub fn visible_measure(&self) -> f64 {
        self.visible.iter().map(|v| v[1] - v[0]).sum()
    }
}

/// Sweeps `φ` over each interval of `acquisition` with `n_phi_scan` cells
/// and records the direction arcs covered by `±N(φ, x)`.
///
/// Consecutive scan directions are joined along the shorter arc, so the
/// scan must resolve the turning of `N`.
pub fn visibility(
    model: &dyn MotionModel,
    x: Vec2,
    acquisition: &[(f64, f64)],
    n_phi_scan: usize,
) -> Result<VisibilityReport> {
    if n_phi_scan < 16 {
        return Err(Error::InvalidArgument(format!(
            "visibility needs at least 16 scan cells, got {n_phi_scan}"
        )));
    }
    let mut sweeps = Vec::new();
    let mut boundary_angles = Vec::new();
    for &(lo, hi) in acquisition {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "empty acquisition interval [{lo}, {hi}]"
            )));
        }
        check_angle(model, lo)?;
        check_angle(model, hi)?;
        let step = (hi - lo) / n_phi_scan as f64;
        let dirs: Vec<f64> = (0..=n_phi_scan)
            .map(|k| gradient_h(model, lo + k as f64 * step, x).angle())
            .collect();
        for w in dirs.windows(2) {
            let d = angle_diff(w[1], w[0]);
            if d >= 0.0 {
                sweeps.push((w[0], d));
            } else {
                sweeps.push((w[1], -d));
            }
        }
        for a in [dirs[0], dirs[n_phi_scan]] {
            boundary_angles.push(a);
            boundary_angles.push(wrap_angle(a + PI));
        }
    }

    let mirrored: Vec<(f64, f64)> = sweeps
        .iter()
        .flat_map(|&(s, l)| [(s, l), (wrap_angle(s + PI), l)])
        .collect();
    let visible = merge_arcs(&mirrored);
    let invisible = complement(&visible);
    boundary_angles.sort_by(f64::total_cmp);
    boundary_angles.dedup_by(|b, a| (*b - *a).abs() < MERGE_TOL);

    Ok(VisibilityReport {
        x,
        visible,
        invisible,
        boundary_angles,
        sweeps,
    })
}

/// Union of circular arcs `(start, length)` as sorted disjoint intervals in `[0, 2π]`.
pub fn merge_arcs(arcs: &[(f64, f64)]) -> Vec<[f64; 2]> {
    if arcs.iter().any(|&(_, l)| l >= TAU) {
        return vec![[0.0, TAU]];
    }
    let mut pieces: Vec<[f64; 2]> = Vec::with_capacity(arcs.len() + 1);
    for &(s, l) in arcs {
        let s = wrap_angle(s);
        let e = s + l;
        if e > TAU {
            pieces.push([s, TAU]);
            pieces.push([0.0, e - TAU]);
        } else {
            pieces.push([s, e]);
        }
    }
    pieces.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::new();
    for p in pieces {
        match out.last_mut() {
            Some(last) if p[0] <= last[1] + MERGE_TOL => last[1] = last[1].max(p[1]),
            _ => out.push(p),
        }
    }
    // snap to the circle ends so wrap-around pieces are recognizable
    if let Some(first) = out.first_mut() {
        if first[0] <= MERGE_TOL {
            first[0] = 0.0;
        }
    }
    if let Some(last) = out.last_mut() {
        if last[1] >= TAU - MERGE_TOL {
            last[1] = TAU;
        }
    }
    out
}

/// `[0, 2π]` minus the given sorted disjoint intervals.
pub fn complement(intervals: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let mut cursor = 0.0;
    for &[lo, hi] in intervals {
        if lo > cursor {
            out.push([cursor, lo]);
        }
        cursor = hi;
    }
    if cursor < TAU {
        out.push([cursor, TAU]);
    }
    out
}
