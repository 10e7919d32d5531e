//! Ellipse-sum phantoms with closed-form projections and boundary wavefront sets.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{theta, DirectionAngle, Vec2};
use crate::grid::{GridSpec, ImageGrid};

/// One ellipse with constant intensity inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-axes `(a, b)` along the tilted x and y directions.
    pub semi_axes: [f64; 2],
    /// Counter-clockwise rotation of the `a` axis, radians.
    #[serde(default)]
    pub tilt: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn new(center: (f64, f64), semi_axes: (f64, f64), tilt: f64, intensity: f64) -> Self {
        Ellipse {
            center: [center.0, center.1],
            semi_axes: [semi_axes.0, semi_axes.1],
            tilt,
            intensity,
        }
    }

    pub fn disk(center: (f64, f64), radius: f64, intensity: f64) -> Self {
        Self::new(center, (radius, radius), 0.0, intensity)
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }

    fn local(&self, p: Vec2) -> Vec2 {
        (p - self.center()).rotate(-self.tilt)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let q = self.local(p);
        let [a, b] = self.semi_axes;
        (q.x / a).powi(2) + (q.y / b).powi(2) <= 1.0
    }

    /// Half-widths of the axis-aligned bounding box.
    pub fn half_extents(&self) -> Vec2 {
        let [a, b] = self.semi_axes;
        let (s, c) = self.tilt.sin_cos();
        Vec2::new((a * c).hypot(b * s), (a * s).hypot(b * c))
    }

    /// Length of the chord cut by the line `x · θ(φ) = s`, times the intensity.
    pub fn line_integral(&self, phi: f64, s: f64) -> f64 {
        let [a, b] = self.semi_axes;
        let shifted = s - self.center().dot(theta(phi));
        let (sg, cg) = (phi - self.tilt).sin_cos();
        let r2 = a * a * cg * cg + b * b * sg * sg;
        let d = r2 - shifted * shifted;
        if d <= 0.0 {
            0.0
        } else {
            self.intensity * 2.0 * a * b * d.sqrt() / r2
        }
    }

    /// Boundary point at parameter `t` and its outward unit normal.
    pub fn boundary_point(&self, t: f64) -> (Vec2, Vec2) {
        let [a, b] = self.semi_axes;
        let (st, ct) = t.sin_cos();
        let p = self.center() + Vec2::new(a * ct, b * st).rotate(self.tilt);
        let n = Vec2::new(ct / a, st / b).rotate(self.tilt).normalized();
        (p, n)
    }
}

/// One covector `(x, ξ)` of the wavefront set of a phantom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularitySample {
    pub x: Vec2,
    pub xi_angle: DirectionAngle,
    /// Jump height across the boundary.
    pub strength: f64,
    /// Index of the ellipse the sample belongs to.
    pub source: usize,
}

impl SingularitySample {
    pub fn new(x: Vec2, xi_angle: DirectionAngle, strength: f64) -> Self {
        SingularitySample {
            x,
            xi_angle,
            strength,
            source: 0,
        }
    }

    pub fn xi(&self) -> Vec2 {
        self.xi_angle.unit()
    }
}

/// Sum of ellipse indicators.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EllipsePhantom {
    pub ellipses: Vec<Ellipse>,
}

impl EllipsePhantom {
    pub fn new(ellipses: Vec<Ellipse>) -> Self {
        EllipsePhantom { ellipses }
    }

    pub fn is_empty(&self) -> bool {
        self.ellipses.is_empty()
    }

    /// Checks positive semi-axes and that every ellipse lies in `[-extent, extent]²`.
    pub fn validate(&self, extent: f64) -> Result<()> {
        for (i, e) in self.ellipses.iter().enumerate() {
            let [a, b] = e.semi_axes;
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "ellipse {i}: semi-axes must be positive, got ({a}, {b})"
                )));
            }
            if !(e.center[0].is_finite()
                && e.center[1].is_finite()
                && e.tilt.is_finite()
                && e.intensity.is_finite())
            {
                return Err(Error::InvalidArgument(format!("ellipse {i}: non-finite parameter")));
            }
            let h = e.half_extents();
            let c = e.center();
            if c.x.abs() + h.x > extent || c.y.abs() + h.y > extent {
                return Err(Error::InvalidArgument(format!(
                    "ellipse {i} leaves the support [-{extent}, {extent}]²"
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, p: Vec2) -> f64 {
        self.ellipses
            .iter()
            .filter(|e| e.contains(p))
            .map(|e| e.intensity)
            .sum()
    }

    /// Samples the phantom at pixel centers (no anti-aliasing).
    pub fn rasterize(&self, spec: GridSpec) -> Result<ImageGrid> {
        ImageGrid::from_fn(spec, |p| self.value(p))
    }

    /// Exact static line integral over `x · θ(φ) = s`.
    pub fn analytic_static_radon(&self, phi: f64, s: f64) -> f64 {
        self.ellipses.iter().map(|e| e.line_integral(phi, s)).sum()
    }

    /// `n_per_ellipse` uniformly parametrized boundary points per ellipse,
    /// each emitted with its outward normal and the antipodal direction.
    pub fn boundary_wavefront(&self, n_per_ellipse: usize) -> Result<Vec<SingularitySample>> {
        if n_per_ellipse < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 4 boundary samples per ellipse, got {n_per_ellipse}"
            )));
        }
        let mut out = Vec::with_capacity(2 * n_per_ellipse * self.ellipses.len());
        for (i, e) in self.ellipses.iter().enumerate() {
            for k in 0..n_per_ellipse {
                let t = TAU * k as f64 / n_per_ellipse as f64;
                let (p, n) = e.boundary_point(t);
                let dir = DirectionAngle::from_vector(n);
                for xi in [dir, dir.antipode()] {
                    out.push(SingularitySample {
                        x: p,
                        xi_angle: xi,
                        strength: e.intensity,
                        source: i,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Illustrative head-like phantom: a thin outer shell with three inner
/// features. Boundaries do not touch each other. These numbers are
/// repository constants, not measured data.
pub fn default_phantom() -> EllipsePhantom {
    EllipsePhantom::new(vec![
        Ellipse::new((0.0, 0.0), (0.80, 0.62), 0.0, 1.0),
        Ellipse::new((0.0, -0.01), (0.72, 0.55), 0.0, -0.7),
        Ellipse::new((-0.25, 0.15), (0.18, 0.10), 0.6, 0.5),
        Ellipse::new((0.28, -0.12), (0.12, 0.22), -0.4, 0.4),
        Ellipse::new((0.05, 0.32), (0.06, 0.06), 0.0, 0.6),
    ])
}
