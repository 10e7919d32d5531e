use crate::error::Result;
use crate::geometry::{theta, theta_perp};
use crate::grid::{ImageGrid, Sinogram, SinogramSpec};
use crate::motion::{check_angle, MotionModel};

use super::WeightMode;

/// Half-length of the integration segment along each line: long enough to
/// cross the whole detector and the whole (rotated) image square.
pub fn line_half_length(extent: f64, s_max: f64) -> f64 {
    s_max.max(std::f64::consts::SQRT_2 * extent)
}

/// Dynamic forward operator: integrates the time-φ object `f ∘ Γ_φ` along
/// the straight line `l(φ, s)`.
///
/// Midpoint rule in `t` with step at most half a pixel; `f` is sampled
/// bilinearly and is zero outside its grid. Parallel over angles.
pub fn forward_project(
    f: &ImageGrid,
    model: &dyn MotionModel,
    spec: SinogramSpec,
    weight: &WeightMode,
) -> Result<Sinogram> {
    spec.validate()?;
    check_angle(model, spec.phi_range[0])?;
    check_angle(model, spec.phi_range[1])?;

    let grid = f.spec();
    let half = line_half_length(grid.extent, spec.s_max);
    let n_t = (2.0 * half / (0.5 * grid.pixel_size())).ceil() as usize;
    let dt = 2.0 * half / n_t as f64;

    let mut values = vec![0.0; spec.len()];
    crate::par::for_each_row(&mut values, spec.n_s, |i, row| {
        let phi = spec.phi(i);
        let th = theta(phi);
        let dir = theta_perp(phi);
        for (j, out) in row.iter_mut().enumerate() {
            let base = th * spec.s(j);
            let mut acc = 0.0;
            for k in 0..n_t {
                let p = base + dir * (-half + (k as f64 + 0.5) * dt);
                let z = model.forward(phi, p);
                let v = f.bilinear_sample(z);
                if v == 0.0 {
                    continue;
                }
                let w = match weight {
                    WeightMode::Intensity => 1.0,
                    WeightMode::MassPreserving => model.jacobian_det_inverse(phi, p),
                    WeightMode::Custom(mu) => mu.eval(phi, z),
                };
                acc += v * w;
            }
            *out = acc * dt;
        }
    });
    Sinogram::from_values(spec, values)
}
