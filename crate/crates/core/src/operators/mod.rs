//! The dynamic forward operator, filters, backprojections and the composed
//! reconstruction operators.

mod backproject;
mod filter;
mod forward;
mod pipeline;

pub use backproject::{backproject_periodic, backproject_restricted};
pub use filter::{apply_filter, filter_response, Apodization, FilterKind, FilterSpec};
pub use forward::{forward_project, line_half_length};
pub use pipeline::{
    angular_taper, reconstruct, CutoffKind, CutoffSpec, PipelineSpec, ReconstructionInput,
    RAMP_NORMALIZATION,
};

use std::fmt;
use std::sync::Arc;

use crate::geometry::Vec2;

/// Positive weight `w(φ, x)` supplied by the caller.
#[derive(Clone)]
pub struct CustomWeight(Arc<dyn Fn(f64, Vec2) -> f64 + Send + Sync>);

impl CustomWeight {
    pub fn new(f: impl Fn(f64, Vec2) -> f64 + Send + Sync + 'static) -> Self {
        CustomWeight(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, phi: f64, x: Vec2) -> f64 {
        (self.0)(phi, x)
    }
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomWeight(..)")
    }
}

/// How the time-φ object is weighted.
///
/// | mode              | forward weight at time-φ point `p`      | backprojection weight at `x` |
/// |-------------------|-----------------------------------------|------------------------------|
/// | `Intensity`       | 1                                       | `|det D(Γ_φ⁻¹)(x)|`          |
/// | `MassPreserving`  | `|det D(Γ_φ⁻¹)(p)|`                     | `|det D(Γ_φ⁻¹)(x)|`          |
/// | `Custom(μ)`       | `μ(φ, Γ_φ p)` (reference position)      | `μ(φ, x)`                    |
///
/// With `Intensity` the backprojection is the formal dual of the forward operator.
#[derive(Debug, Clone, Default)]
pub enum WeightMode {
    #[default]
    Intensity,
    MassPreserving,
    Custom(CustomWeight),
}
