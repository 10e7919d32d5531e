//! Motion models Γ and the curve geometry they induce.
//!
//! `Γ(φ, x)` is the time-0 position of the particle that sits at `x` at time
//! `φ`. The dynamic data at `(φ, s)` integrate the reference object along
//! the curve `C(φ, s) = {x : H(φ, x) = s}` with
//! `H(φ, x) = (Γ_φ⁻¹ x) · θ(φ)`.

mod builtin;
mod hypothesis;

pub use builtin::{counter_rotation, identity, nonaffine, third_rotation, NonAffine, Rotation};
pub use hypothesis::{check_hypothesis, HypothesisReport, HypothesisSampling};

use std::f64::consts::TAU;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::geometry::{theta, theta_perp, Vec2};

/// Default half-width of the angle extension `(-ε, 2π + ε)`.
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Relative spatial step for central differences (scaled by the model's length scale).
pub const FD_STEP_X: f64 = 1e-4;
/// Angular step for central differences.
pub const FD_STEP_PHI: f64 = 1e-4;

/// A family of diffeomorphisms `Γ_φ` of the plane.
///
/// Implementors supply the forward and inverse maps; everything else has a
/// finite-difference default that analytic models may override. Models are
/// evaluated concurrently and must be pure.
pub trait MotionModel: Send + Sync + Debug {
    fn name(&self) -> &str;

    /// `Γ_φ x`.
    fn forward(&self, phi: f64, x: Vec2) -> Vec2;

    /// `Γ_φ⁻¹ x`.
    fn inverse(&self, phi: f64, x: Vec2) -> Vec2;

    /// Whether Γ is smoothly 2π-periodic in φ.
    fn is_periodic(&self) -> bool;

    /// Extension margin ε of the angle domain.
    fn epsilon(&self) -> f64 {
        DEFAULT_EPSILON
    }

    /// Typical object size; scales the spatial finite-difference step.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// `|det D(Γ_φ⁻¹)(x)|`.
    fn jacobian_det_inverse(&self, phi: f64, x: Vec2) -> f64 {
        let h = FD_STEP_X * self.length_scale();
        let dx = (self.inverse(phi, x + Vec2::new(h, 0.0)) - self.inverse(phi, x - Vec2::new(h, 0.0)))
            * (0.5 / h);
        let dy = (self.inverse(phi, x + Vec2::new(0.0, h)) - self.inverse(phi, x - Vec2::new(0.0, h)))
            * (0.5 / h);
        dx.cross(dy).abs()
    }

    /// `H(φ, x) = (Γ_φ⁻¹ x) · θ(φ)`.
    fn h(&self, phi: f64, x: Vec2) -> f64 {
        self.inverse(phi, x).dot(theta(phi))
    }

    /// `H` and the inverse Jacobian determinant together; models that share
    /// work between the two should override this.
    fn h_and_jacobian(&self, phi: f64, x: Vec2) -> (f64, f64) {
        (self.h(phi, x), self.jacobian_det_inverse(phi, x))
    }

    /// Analytic `D_x H`, if available.
    fn grad_h(&self, _phi: f64, _x: Vec2) -> Option<Vec2> {
        None
    }

    /// Analytic `∂_φ H`, if available.
    fn dphi_h(&self, _phi: f64, _x: Vec2) -> Option<f64> {
        None
    }

    /// Analytic `D_x ∂_φ H`, if available.
    fn grad_dphi_h(&self, _phi: f64, _x: Vec2) -> Option<Vec2> {
        None
    }
}

/// Open angle interval on which `model` may be evaluated, or `None` when
/// every angle is admissible (smoothly periodic models).
pub fn angle_domain(model: &dyn MotionModel) -> Option<(f64, f64)> {
    if model.is_periodic() {
        None
    } else {
        let eps = model.epsilon();
        Some((-eps, TAU + eps))
    }
}

pub fn check_angle(model: &dyn MotionModel, phi: f64) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("angle {phi} is not finite")));
    }
    match angle_domain(model) {
        Some((lo, hi)) if !(phi > lo && phi < hi) => Err(Error::AngleOutOfDomain { phi, lo, hi }),
        _ => Ok(()),
    }
}

/// `D_x H` without a domain check: analytic when provided, else central differences.
pub fn gradient_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> Vec2 {
    if let Some(g) = model.grad_h(phi, x) {
        return g;
    }
    let h = FD_STEP_X * model.length_scale();
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    Vec2::new(
        (model.h(phi, x + ex) - model.h(phi, x - ex)) / (2.0 * h),
        (model.h(phi, x + ey) - model.h(phi, x - ey)) / (2.0 * h),
    )
}

/// `∂_φ H` without a domain check.
pub fn derivative_phi_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> f64 {
    if let Some(d) = model.dphi_h(phi, x) {
        return d;
    }
    let h = FD_STEP_PHI;
    (model.h(phi + h, x) - model.h(phi - h, x)) / (2.0 * h)
}

/// `D_x ∂_φ H` without a domain check.
pub fn gradient_dphi_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> Vec2 {
    if let Some(g) = model.grad_dphi_h(phi, x) {
        return g;
    }
    if model.grad_h(phi, x).is_some() {
        let h = FD_STEP_PHI;
        return (gradient_h(model, phi + h, x) - gradient_h(model, phi - h, x)) * (0.5 / h);
    }
    let h = FD_STEP_X * model.length_scale();
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    Vec2::new(
        (derivative_phi_h(model, phi, x + ex) - derivative_phi_h(model, phi, x - ex)) / (2.0 * h),
        (derivative_phi_h(model, phi, x + ey) - derivative_phi_h(model, phi, x - ey)) / (2.0 * h),
    )
}

/// `H(φ, x)`.
pub fn eval_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> Result<f64> {
    check_angle(model, phi)?;
    Ok(model.h(phi, x))
}

/// `N(φ, x) = D_x H(φ, x)`, the conormal of `C(φ, H(φ, x))` at `x`.
pub fn eval_n(model: &dyn MotionModel, phi: f64, x: Vec2) -> Result<Vec2> {
    check_angle(model, phi)?;
    Ok(gradient_h(model, phi, x))
}

/// `∂_φ H(φ, x)`.
pub fn eval_dphi_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> Result<f64> {
    check_angle(model, phi)?;
    Ok(derivative_phi_h(model, phi, x))
}

/// `D_x ∂_φ H(φ, x)`.
pub fn eval_grad_dphi_h(model: &dyn MotionModel, phi: f64, x: Vec2) -> Result<Vec2> {
    check_angle(model, phi)?;
    Ok(gradient_dphi_h(model, phi, x))
}

/// Samples the curve `C(φ, s)` as `Γ_φ(sθ(φ) + tθ(φ)^⊥)` for `n_points`
/// uniform `t` in `param_range` (end points included).
///
/// Every returned point `y` satisfies `H(φ, y) = s`.
pub fn integration_curve(
    model: &dyn MotionModel,
    phi: f64,
    s: f64,
    param_range: (f64, f64),
    n_points: usize,
) -> Result<Vec<Vec2>> {
    check_angle(model, phi)?;
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "a curve needs at least 2 points, got {n_points}"
        )));
    }
    let (t0, t1) = param_range;
    let base = theta(phi) * s;
    let dir = theta_perp(phi);
    let step = (t1 - t0) / (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|k| model.forward(phi, base + dir * (t0 + k as f64 * step)))
        .collect())
}
