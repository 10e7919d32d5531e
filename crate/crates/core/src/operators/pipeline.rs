use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ImageGrid, Sinogram, SinogramSpec};
use crate::motion::MotionModel;

use super::{
    apply_filter, backproject_periodic, backproject_restricted, forward_project, FilterKind,
    FilterSpec, WeightMode,
};

/// Global factor applied after backprojecting ramp- or lambda-filtered
/// data. For the static model and a full turn, `RAMP_NORMALIZATION` times
/// the backprojection of ramp-filtered data inverts the Radon transform.
pub const RAMP_NORMALIZATION: f64 = 1.0 / (4.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// Indicator of the data interval.
    Sharp,
    /// Raised-cosine taper at both ends of the data interval.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    /// Width of each taper ramp in radians (smooth cutoff only).
    #[serde(default = "default_taper")]
    pub taper_width: f64,
    /// How far the dual-side cutoff ψ may reach beyond the data interval.
    /// Data vanish outside it, so ψ acts as 1 on the data and this value
    /// is only validated against the model's ε.
    #[serde(default)]
    pub psi_margin: f64,
}

fn default_taper() -> f64 {
    0.15
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec::sharp()
    }
}

impl CutoffSpec {
    pub fn sharp() -> Self {
        CutoffSpec {
            kind: CutoffKind::Sharp,
            taper_width: default_taper(),
            psi_margin: 0.0,
        }
    }

    pub fn smooth(taper_width: f64) -> Self {
        CutoffSpec {
            kind: CutoffKind::Smooth,
            taper_width,
            psi_margin: 0.0,
        }
    }

    pub fn validate(&self, model: &dyn MotionModel) -> Result<()> {
        if self.kind == CutoffKind::Smooth && !(self.taper_width > 0.0 && self.taper_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smooth cutoff needs a positive taper width, got {}",
                self.taper_width
            )));
        }
        if !(self.psi_margin >= 0.0 && self.psi_margin <= model.epsilon()) {
            return Err(Error::InvalidArgument(format!(
                "psi_margin {} must lie in [0, ε = {}]",
                self.psi_margin,
                model.epsilon()
            )));
        }
        Ok(())
    }

    /// Cutoff value at `phi` for data on `[lo, hi]`.
    pub fn weight(&self, phi: f64, lo: f64, hi: f64) -> f64 {
        match self.kind {
            CutoffKind::Sharp => {
                if phi >= lo && phi <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffKind::Smooth => angular_taper(phi, lo, hi, self.taper_width),
        }
    }
}

/// Raised-cosine window: 0 outside `[lo, hi]`, rising over `width` at
/// each end, 1 in between. The ramps shrink if the interval is shorter
/// than `2 * width`.
pub fn angular_taper(phi: f64, lo: f64, hi: f64, width: f64) -> f64 {
    if !(phi >= lo && phi <= hi) {
        return 0.0;
    }
    let w = width.min(0.5 * (hi - lo));
    let d = (phi - lo).min(hi - phi);
    if d >= w {
        1.0
    } else {
        0.5 * (1.0 - (PI * d / w).cos())
    }
}

/// Everything `reconstruct` needs besides the model and the input.
#[derive(Debug, Clone)]
pub struct PipelineSpec {
    /// Sampling used when the forward data are simulated.
    pub sinogram: SinogramSpec,
    pub grid: GridSpec,
    pub filter: FilterSpec,
    pub cutoff: CutoffSpec,
    pub weight: WeightMode,
}

#[derive(Debug, Clone, Copy)]
pub enum ReconstructionInput<'a> {
    /// Reference object; data are simulated first.
    Image(&'a ImageGrid),
    /// Measured data.
    Sinogram(&'a Sinogram),
}

/// `L = R^t_{ψ} P χ R f`: forward projection (for image input), angular
/// cutoff, filter, backprojection, normalization.
///
/// With the smooth cutoff the taper multiplies both the data and the
/// backprojection weight. The periodic backprojection is used only for a
/// periodic model, sharp cutoff and full-turn data; otherwise the
/// restricted one.
pub fn reconstruct(
    input: ReconstructionInput<'_>,
    model: &dyn MotionModel,
    spec: &PipelineSpec,
) -> Result<ImageGrid> {
    spec.filter.validate()?;
    spec.cutoff.validate(model)?;
    spec.grid.validate()?;

    let mut g = match input {
        ReconstructionInput::Image(f) => forward_project(f, model, spec.sinogram, &spec.weight)?,
        ReconstructionInput::Sinogram(g) => g.clone(),
    };

    let sspec = g.spec();
    if spec.cutoff.kind == CutoffKind::Smooth {
        let [lo, hi] = sspec.phi_range;
        let n_s = sspec.n_s;
        crate::par::for_each_row(g.values_mut(), n_s, |i, row| {
            let w = spec.cutoff.weight(sspec.phi(i), lo, hi);
            row.iter_mut().for_each(|v| *v *= w);
        });
    }

    let filtered = apply_filter(&g, &spec.filter)?;

    let use_periodic =
        model.is_periodic() && spec.cutoff.kind == CutoffKind::Sharp && sspec.is_full_turn();
    let bp = if use_periodic {
        backproject_periodic(&filtered, model, spec.grid, &spec.weight)?
    } else {
        backproject_restricted(&filtered, model, spec.grid, &spec.cutoff, &spec.weight)?
    };

    let scale = match spec.filter.kind {
        FilterKind::Ramp | FilterKind::Lambda => RAMP_NORMALIZATION,
        FilterKind::None => 1.0,
    };
    Ok(bp.scaled(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{identity, third_rotation};

    #[test]
    fn taper_shape() {
        let (lo, hi) = (0.0, 2.0 * PI);
        assert_eq!(angular_taper(-0.01, lo, hi, 0.15), 0.0);
        assert_eq!(angular_taper(0.0, lo, hi, 0.15), 0.0);
        assert!((angular_taper(0.075, lo, hi, 0.15) - 0.5).abs() < 1e-12);
        assert_eq!(angular_taper(1.0, lo, hi, 0.15), 1.0);
        assert!((angular_taper(hi - 0.075, lo, hi, 0.15) - 0.5).abs() < 1e-12);
        assert!(angular_taper(hi, lo, hi, 0.15).abs() < 1e-12);
    }

    #[test]
    fn cutoff_validation() {
        let m = third_rotation();
        assert!(CutoffSpec::smooth(0.0).validate(&m).is_err());
        assert!(CutoffSpec::smooth(0.15).validate(&m).is_ok());
        let mut c = CutoffSpec::sharp();
        c.psi_margin = 0.2;
        assert!(c.validate(&m).is_err());
        c.psi_margin = 0.1;
        assert!(c.validate(&m).is_ok());
    }

    #[test]
    fn cutoff_spec_from_json() {
        let c: CutoffSpec = serde_json::from_str(r#"{"kind":"smooth"}"#).unwrap();
        assert_eq!(c.kind, CutoffKind::Smooth);
        assert_eq!(c.taper_width, 0.15);
        assert!(serde_json::from_str::<CutoffSpec>(r#"{"kind":"smooth","width":1}"#).is_err());
    }

    #[test]
    fn zero_data_reconstructs_to_zero() {
        let grid = GridSpec::square(16, 1.0).unwrap();
        let sino = SinogramSpec::full_turn(12, 16, 1.5).unwrap();
        let g = Sinogram::zeros(sino).unwrap();
        let spec = PipelineSpec {
            sinogram: sino,
            grid,
            filter: FilterSpec::ramp(),
            cutoff: CutoffSpec::smooth(0.15),
            weight: WeightMode::Intensity,
        };
        for m in [&identity() as &dyn MotionModel, &third_rotation()] {
            let r = reconstruct(ReconstructionInput::Sinogram(&g), m, &spec).unwrap();
            assert!(r.values().iter().all(|&v| v == 0.0));
        }
    }
}
