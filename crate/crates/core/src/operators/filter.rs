use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Sinogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// `√(−d²/ds²)`, symbol `|σ|`.
    Ramp,
    /// `−d²/ds²`, symbol `σ²`.
    Lambda,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Apodization {
    None,
    /// Multiplies the response by `cos(π f / 2 f_c)` up to the cutoff `f_c`.
    Cosine,
}

/// The data-space operator `P`, applied row by row in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub kind: FilterKind,
    #[serde(default = "default_apodization")]
    pub apodization: Apodization,
    /// Band limit as a fraction of the Nyquist frequency, in `(0, 1]`.
    #[serde(default = "default_cutoff")]
    pub cutoff_fraction: f64,
}

fn default_apodization() -> Apodization {
    Apodization::Cosine
}

fn default_cutoff() -> f64 {
    1.0
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec::ramp()
    }
}

impl FilterSpec {
    pub fn ramp() -> Self {
        FilterSpec {
            kind: FilterKind::Ramp,
            apodization: Apodization::Cosine,
            cutoff_fraction: 1.0,
        }
    }

    pub fn lambda() -> Self {
        FilterSpec {
            kind: FilterKind::Lambda,
            apodization: Apodization::None,
            cutoff_fraction: 1.0,
        }
    }

    /// Unapodized band-limited ramp (Ram-Lak).
    pub fn ram_lak() -> Self {
        FilterSpec {
            kind: FilterKind::Ramp,
            apodization: Apodization::None,
            cutoff_fraction: 1.0,
        }
    }

    pub fn none() -> Self {
        FilterSpec {
            kind: FilterKind::None,
            apodization: Apodization::None,
            cutoff_fraction: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff_fraction must lie in (0, 1], got {}",
                self.cutoff_fraction
            )));
        }
        Ok(())
    }
}

/// Transfer function on an FFT grid of length `n` (a power of two) for
/// detector spacing `ds`.
///
/// The ramp is the transform of the band-limited spatial kernel
/// `k(0) = 2π/(4ds²)`, `k(m) = −2π/(π²m²ds²)` for odd `m`, 0 for even `m`,
/// times `ds` (a convolution quadrature weight); the lambda filter is the
/// centered second difference `[−1, 2, −1]/ds²`.
pub fn filter_response(spec: &FilterSpec, n: usize, ds: f64) -> Vec<f64> {
    let mut kernel = vec![Complex::new(0.0, 0.0); n];
    match spec.kind {
        FilterKind::None => return vec![1.0; n],
        FilterKind::Ramp => {
            let half = (n / 2) as isize;
            for m in -half..half {
                let v = if m == 0 {
                    1.0 / (4.0 * ds * ds)
                } else if m % 2 != 0 {
                    -1.0 / (PI * PI * (m * m) as f64 * ds * ds)
                } else {
                    0.0
                };
                kernel[m.rem_euclid(n as isize) as usize].re = 2.0 * PI * v * ds;
            }
        }
        FilterKind::Lambda => {
            let inv = 1.0 / (ds * ds);
            kernel[0].re = 2.0 * inv;
            kernel[1].re = -inv;
            kernel[n - 1].re = -inv;
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut kernel);

    let f_cut = 0.5 * spec.cutoff_fraction;
    kernel
        .iter()
        .enumerate()
        .map(|(k, c)| {
            // frequency in cycles per sample, in [0, 0.5]
            let f = k.min(n - k) as f64 / n as f64;
            if f > f_cut + 1e-12 {
                return 0.0;
            }
            let window = match spec.apodization {
                Apodization::None => 1.0,
                Apodization::Cosine => (PI * f / (2.0 * f_cut)).cos(),
            };
            c.re * window
        })
        .collect()
}

/// Applies `P` to every angle row, zero-padding each row to a power of two
/// of at least twice its length.
pub fn apply_filter(g: &Sinogram, spec: &FilterSpec) -> Result<Sinogram> {
    spec.validate()?;
    if spec.kind == FilterKind::None {
        return Ok(g.clone());
    }
    let n_s = g.n_s();
    if n_s < 8 {
        return Err(Error::InvalidArgument(format!(
            "filtering needs at least 8 detector samples, got {n_s}"
        )));
    }
    let n = (2 * n_s).next_power_of_two();
    let response = filter_response(spec, n, g.spec().ds());
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut out = g.clone();
    crate::par::for_each_row(out.values_mut(), n_s, |_, row| {
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (b, &v) in buf.iter_mut().zip(row.iter()) {
            b.re = v;
        }
        fwd.process(&mut buf);
        for (b, &h) in buf.iter_mut().zip(&response) {
            *b *= h;
        }
        inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (r, b) in row.iter_mut().zip(&buf) {
            *r = b.re * scale;
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SinogramSpec;

    fn sino(n_s: usize, f: impl Fn(f64) -> f64 + Sync + Send) -> Sinogram {
        let spec = SinogramSpec::new(3, n_s, [0.0, 1.0], 1.0).unwrap();
        Sinogram::from_fn(spec, |_, s| f(s)).unwrap()
    }

    #[test]
    fn none_is_identity() {
        let g = sino(16, |s| s * s);
        assert_eq!(apply_filter(&g, &FilterSpec::none()).unwrap(), g);
    }

    #[test]
    fn rejects_short_rows_and_bad_cutoff() {
        let g = sino(7, |_| 1.0);
        assert!(apply_filter(&g, &FilterSpec::ramp()).is_err());
        let mut spec = FilterSpec::ramp();
        spec.cutoff_fraction = 0.0;
        assert!(apply_filter(&sino(16, |_| 1.0), &spec).is_err());
        spec.cutoff_fraction = 1.5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn dc_is_annihilated() {
        // The lambda response vanishes at zero frequency exactly; the
        // band-limited ramp only up to the truncation of its kernel.
        let n = 1024;
        let ds = 0.01;
        let lam = filter_response(&FilterSpec::lambda(), n, ds);
        assert_eq!(lam[0], 0.0);
        let ramp = filter_response(&FilterSpec::ram_lak(), n, ds);
        let peak = ramp.iter().cloned().fold(0.0, f64::max);
        assert!(ramp[0].abs() < 1e-3 * peak, "{} vs {}", ramp[0], peak);
    }

    #[test]
    fn constant_row_vanishes_away_from_the_padding_edges() {
        // Zero padding turns a constant row into a boxcar: the response
        // concentrates at the two jumps and decays like 1/distance inside.
        let n_s = 513;
        let g = sino(n_s, |_| 3.0);
        for spec in [FilterSpec::ramp(), FilterSpec::ram_lak(), FilterSpec::lambda()] {
            let out = apply_filter(&g, &spec).unwrap();
            let row = out.row(1);
            let max = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let center = row[n_s / 2 - 8..n_s / 2 + 8]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(center <= 0.01 * max, "{spec:?}: {center} vs {max}");
        }
        let out = apply_filter(&g, &FilterSpec::lambda()).unwrap();
        assert!(out.row(0)[10..n_s - 10].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn lambda_is_second_difference() {
        let g = sino(64, |s| s.powi(3));
        let out = apply_filter(&g, &FilterSpec::lambda()).unwrap();
        let ds = g.spec().ds();
        for j in 5..59 {
            let s = g.spec().s(j);
            // −d²/ds² s³ = −6s, exact for the centered difference
            assert!((out.get(0, j) + 6.0 * s).abs() < 1e-8 * (1.0 / ds));
        }
    }
}
