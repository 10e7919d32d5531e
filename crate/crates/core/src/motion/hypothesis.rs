use std::f64::consts::TAU;

use serde::Serialize;

use crate::geometry::Vec2;

use super::MotionModel;

/// Tolerance for `Γ_0 = id`.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for `Γ_φ⁻¹ Γ_φ = id` and for periodicity.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Sample points at which the motion-model hypotheses are verified.
#[derive(Debug, Clone)]
pub struct HypothesisSampling {
    pub phis: Vec<f64>,
    pub points: Vec<Vec2>,
}

impl HypothesisSampling {
    /// `n_phi` angles spread over the open extension interval and an
    /// `n_x × n_x` grid of points covering `[-extent, extent]²`.
    pub fn uniform(model: &dyn MotionModel, extent: f64, n_phi: usize, n_x: usize) -> Self {
        let eps = model.epsilon();
        let phis = (0..n_phi)
            .map(|k| -eps + (k as f64 + 0.5) * (TAU + 2.0 * eps) / n_phi as f64)
            .collect();
        let step = 2.0 * extent / (n_x.max(2) - 1) as f64;
        let points = (0..n_x * n_x)
            .map(|k| {
                Vec2::new(
                    -extent + (k % n_x) as f64 * step,
                    -extent + (k / n_x) as f64 * step,
                )
            })
            .collect();
        HypothesisSampling { phis, points }
    }
}

/// Largest observed violation of each motion-model hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub model: String,
    /// `max |Γ(0, x) − x|`.
    pub identity_at_zero: f64,
    /// `max |Γ_φ⁻¹(Γ_φ x) − x|` and the reverse composition.
    pub inverse_consistency: f64,
    /// `min |det D(Γ_φ⁻¹)(x)|`.
    pub min_jacobian: f64,
    /// `max |Γ(φ + 2π, x) − Γ(φ, x)|`.
    pub periodicity: f64,
    pub periodic_flag: bool,
    /// Whether the sampled behaviour matches the periodicity flag.
    pub periodic_consistent: bool,
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Verifies `Γ_0 = id`, invertibility, positive Jacobians and the
/// periodicity flag on the given samples. Violations are reported, not raised.
pub fn check_hypothesis(model: &dyn MotionModel, sampling: &HypothesisSampling) -> HypothesisReport {
    let mut identity_at_zero = 0.0f64;
    for &x in &sampling.points {
        identity_at_zero = identity_at_zero.max((model.forward(0.0, x) - x).norm());
    }

    let per_phi: Vec<(f64, f64, f64)> = crate::par::map_range(sampling.phis.len(), |k| {
        let phi = sampling.phis[k];
        let mut inv = 0.0f64;
        let mut jac = f64::INFINITY;
        let mut per = 0.0f64;
        for &x in &sampling.points {
            let fwd = model.forward(phi, x);
            let a = (model.inverse(phi, fwd) - x).norm();
            let b = (model.forward(phi, model.inverse(phi, x)) - x).norm();
            // NaN must register as a violation
            inv = if a.is_nan() || b.is_nan() { f64::INFINITY } else { inv.max(a).max(b) };
            let j = model.jacobian_det_inverse(phi, x);
            jac = if j.is_nan() { f64::NEG_INFINITY } else { jac.min(j) };
            per = per.max((model.forward(phi + TAU, x) - fwd).norm());
        }
        (inv, jac, per)
    });
    let inverse_consistency = per_phi.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_jacobian = per_phi.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let periodicity = per_phi.iter().map(|r| r.2).fold(0.0, f64::max);

    let periodic_flag = model.is_periodic();
    let observed_periodic = periodicity <= CONSISTENCY_TOL;

    let mut violations = Vec::new();
    if !(identity_at_zero <= IDENTITY_TOL) {
        violations.push(format!("Γ_0 differs from the identity by {identity_at_zero:e}"));
    }
    if !(inverse_consistency <= CONSISTENCY_TOL) {
        violations.push(format!(
            "inverse map inconsistent by {inverse_consistency:e}; Γ_φ may not be invertible on the sampled domain"
        ));
    }
    if !(min_jacobian > 0.0) {
        violations.push(format!("inverse Jacobian determinant reaches {min_jacobian:e}"));
    }
    if periodic_flag && !observed_periodic {
        violations.push(format!(
            "model is flagged periodic but Γ(φ+2π) differs from Γ(φ) by {periodicity:e}"
        ));
    }
    if !periodic_flag && !observed_periodic {
        violations.push(format!("not periodic: Γ(φ+2π) differs from Γ(φ) by {periodicity:e}"));
    }

    let passed = identity_at_zero <= IDENTITY_TOL
        && inverse_consistency <= CONSISTENCY_TOL
        && min_jacobian > 0.0
        && (!periodic_flag || observed_periodic);

    HypothesisReport {
        model: model.name().to_string(),
        identity_at_zero,
        inverse_consistency,
        min_jacobian,
        periodicity,
        periodic_flag,
        periodic_consistent: periodic_flag == observed_periodic,
        passed,
        violations,
    }
}
