//! Sampled images and sinograms.
//!
//! Images are stored row-major with `values[iy * nx + ix]`; pixel centers sit
//! at `-extent + (i + 0.5) * (2 * extent / n)` on each axis, so the grid is
//! symmetric about the origin. Sinograms are stored row-major per angle with
//! `values[i_phi * n_s + i_s]`; both the angle and detector samples include
//! their end points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Shape and physical extent of an image grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Half-width of the square support `[-extent, extent]²`.
    pub extent: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, extent: f64) -> Result<Self> {
        let spec = GridSpec { nx, ny, extent };
        spec.validate()?;
        Ok(spec)
    }

    pub fn square(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, n, extent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2x2 pixels, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid extent must be positive, got {}",
                self.extent
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        2.0 * self.extent / self.ny as f64
    }

    /// The smaller of the two pixel sides.
    pub fn pixel_size(&self) -> f64 {
        self.dx().min(self.dy())
    }

    pub fn pixel_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn x_center(&self, ix: usize) -> f64 {
        -self.extent + (ix as f64 + 0.5) * self.dx()
    }

    #[inline]
    pub fn y_center(&self, iy: usize) -> f64 {
        -self.extent + (iy as f64 + 0.5) * self.dy()
    }

    #[inline]
    pub fn center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(self.x_center(ix), self.y_center(iy))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x.abs() <= self.extent && p.y.abs() <= self.extent
    }
}

/// A scalar field sampled at pixel centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn zeros(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(ImageGrid {
            spec,
            values: vec![0.0; spec.len()],
        })
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {}x{} grid, got {}",
                spec.len(),
                spec.nx,
                spec.ny,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite image value at index {i}"
            )));
        }
        Ok(ImageGrid { spec, values })
    }

    /// Samples `f` at every pixel center.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(Vec2) -> f64 + Sync + Send,
    {
        spec.validate()?;
        let mut values = vec![0.0; spec.len()];
        crate::par::for_each_row(&mut values, spec.nx, |iy, row| {
            let y = spec.y_center(iy);
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(Vec2::new(spec.x_center(ix), y));
            }
        });
        Self::from_values(spec, values)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    pub fn extent(&self) -> f64 {
        self.spec.extent
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// Bilinear interpolation at a physical point.
    ///
    /// Returns 0 outside `[-extent, extent]²`. Between the outermost pixel
    /// centers and the support boundary the field is interpolated against
    /// zero, i.e. the image is extended by zero.
    pub fn bilinear_sample(&self, p: Vec2) -> f64 {
        let spec = &self.spec;
        if !(p.x.abs() <= spec.extent && p.y.abs() <= spec.extent) {
            return 0.0;
        }
        let u = (p.x + spec.extent) / spec.dx() - 0.5;
        let v = (p.y + spec.extent) / spec.dy() - 0.5;
        let i0 = u.floor();
        let j0 = v.floor();
        let fu = u - i0;
        let fv = v - j0;
        let i0 = i0 as isize;
        let j0 = j0 as isize;

        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= spec.nx as isize || j >= spec.ny as isize {
                0.0
            } else {
                self.values[j as usize * spec.nx + i as usize]
            }
        };

        let a = at(i0, j0) * (1.0 - fu) + at(i0 + 1, j0) * fu;
        let b = at(i0, j0 + 1) * (1.0 - fu) + at(i0 + 1, j0 + 1) * fu;
        a * (1.0 - fv) + b * fv
    }

    /// Sum of all values in storage order.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Euclidean norm of the values (no pixel-area factor).
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||self - other|| / ||other||`.
    pub fn relative_l2_error(&self, reference: &ImageGrid) -> Result<f64> {
        if self.spec != reference.spec {
            return Err(Error::GeometryMismatch("image grids differ".into()));
        }
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(num.sqrt() / reference.l2_norm())
    }

    pub fn scaled(mut self, k: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= k);
        self
    }
}

/// Sampling pattern of a sinogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinogramSpec {
    pub n_phi: usize,
    pub n_s: usize,
    /// `[φ_min, φ_max]`, end points included.
    pub phi_range: [f64; 2],
    /// Detector half-width.
    pub s_max: f64,
}

impl SinogramSpec {
    pub fn new(n_phi: usize, n_s: usize, phi_range: [f64; 2], s_max: f64) -> Result<Self> {
        let spec = SinogramSpec {
            n_phi,
            n_s,
            phi_range,
            s_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Full turn `[0, 2π]`.
    pub fn full_turn(n_phi: usize, n_s: usize, s_max: f64) -> Result<Self> {
        Self::new(n_phi, n_s, [0.0, std::f64::consts::TAU], s_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phi < 2 || self.n_s < 2 {
            return Err(Error::InvalidArgument(format!(
                "sinogram needs at least 2x2 samples, got {}x{}",
                self.n_phi, self.n_s
            )));
        }
        let [lo, hi] = self.phi_range;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "invalid angle range [{lo}, {hi}]"
            )));
        }
        if !(self.s_max.is_finite() && self.s_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "detector half-width must be positive, got {}",
                self.s_max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dphi(&self) -> f64 {
        (self.phi_range[1] - self.phi_range[0]) / (self.n_phi - 1) as f64
    }

    #[inline]
    pub fn ds(&self) -> f64 {
        2.0 * self.s_max / (self.n_s - 1) as f64
    }

    #[inline]
    pub fn phi(&self, i: usize) -> f64 {
        self.phi_range[0] + i as f64 * self.dphi()
    }

    #[inline]
    pub fn s(&self, j: usize) -> f64 {
        -self.s_max + j as f64 * self.ds()
    }

    pub fn len(&self) -> usize {
        self.n_phi * self.n_s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the samples cover exactly one full turn, so that the first
    /// and last rows describe the same angle.
    pub fn is_full_turn(&self) -> bool {
        let span = self.phi_range[1] - self.phi_range[0];
        (span - std::f64::consts::TAU).abs() < 1e-12
    }
}

/// Data `g(φ_i, s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    spec: SinogramSpec,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(spec: SinogramSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Sinogram {
            spec,
            values: vec![0.0; spec.len()],
        })
    }

    pub fn from_values(spec: SinogramSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} sinogram values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sinogram value at index {i}"
            )));
        }
        Ok(Sinogram { spec, values })
    }

    /// Evaluates `g(φ, s)` at every sample, one angle row per task.
    pub fn from_fn<F>(spec: SinogramSpec, g: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        spec.validate()?;
        let mut values = vec![0.0; spec.len()];
        crate::par::for_each_row(&mut values, spec.n_s, |i, row| {
            let phi = spec.phi(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = g(phi, spec.s(j));
            }
        });
        Self::from_values(spec, values)
    }

    pub fn spec(&self) -> SinogramSpec {
        self.spec
    }

    pub fn n_phi(&self) -> usize {
        self.spec.n_phi
    }

    pub fn n_s(&self) -> usize {
        self.spec.n_s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.spec.n_s;
        &self.values[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n_s + j]
    }

    /// Linear interpolation in `s` within angle row `phi_index`; 0 for `|s| > s_max`.
    pub fn linear_sample_s(&self, phi_index: usize, s: f64) -> Result<f64> {
        if phi_index >= self.spec.n_phi {
            return Err(Error::IndexOutOfRange {
                index: phi_index,
                len: self.spec.n_phi,
            });
        }
        Ok(sample_row(self.row(phi_index), self.spec.s_max, self.spec.ds(), s))
    }
}

/// Linear interpolation of a detector row with end points at `±s_max`.
#[inline]
pub(crate) fn sample_row(row: &[f64], s_max: f64, ds: f64, s: f64) -> f64 {
    if !(s.abs() <= s_max) {
        return 0.0;
    }
    let u = (s + s_max) / ds;
    let j = u.floor();
    let f = u - j;
    let j = j as usize;
    if j + 1 >= row.len() {
        return row[row.len() - 1];
    }
    row[j] * (1.0 - f) + row[j + 1] * f
}
