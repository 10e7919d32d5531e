use crate::error::{Error, Result};
use crate::grid::{sample_row, GridSpec, ImageGrid, Sinogram};
use crate::motion::{check_angle, MotionModel};

use super::{CutoffSpec, WeightMode};

/// Shared kernel: `Σ_i q_i · w(φ_i, x) · g(φ_i, H(φ_i, x))`, parallel over
/// image rows, angles summed in index order.
fn backproject_weighted(
    g: &Sinogram,
    model: &dyn MotionModel,
    grid: GridSpec,
    quad: &[f64],
    weight: &WeightMode,
) -> Result<ImageGrid> {
    let spec = g.spec();
    let ds = spec.ds();
    let phis: Vec<f64> = (0..spec.n_phi).map(|i| spec.phi(i)).collect();
    let mut values = vec![0.0; grid.len()];
    crate::par::for_each_row(&mut values, grid.nx, |iy, row| {
        let y = grid.y_center(iy);
        for (ix, out) in row.iter_mut().enumerate() {
            let x = crate::geometry::Vec2::new(grid.x_center(ix), y);
            let mut acc = 0.0;
            for (i, (&phi, &q)) in phis.iter().zip(quad).enumerate() {
                if q == 0.0 {
                    continue;
                }
                let (h, w) = match weight {
                    WeightMode::Custom(nu) => (model.h(phi, x), nu.eval(phi, x)),
                    _ => model.h_and_jacobian(phi, x),
                };
                acc += q * w * sample_row(g.row(i), spec.s_max, ds, h);
            }
            *out = acc;
        }
    });
    ImageGrid::from_values(grid, values)
}

/// Backprojection `R_Γ^t g` for a smoothly periodic model and data on a
/// full turn. The sample at 2π is the same time instant as the one at 0,
/// so the two end rows share one quadrature weight.
pub fn backproject_periodic(
    g: &Sinogram,
    model: &dyn MotionModel,
    grid: GridSpec,
    weight: &WeightMode,
) -> Result<ImageGrid> {
    if !model.is_periodic() {
        return Err(Error::NotPeriodic(format!(
            "model `{}` is not smoothly periodic; use backproject_restricted",
            model.name()
        )));
    }
    let spec = g.spec();
    if !spec.is_full_turn() {
        return Err(Error::GeometryMismatch(format!(
            "periodic backprojection needs data on [0, 2π], got [{}, {}]",
            spec.phi_range[0], spec.phi_range[1]
        )));
    }
    let dphi = spec.dphi();
    let mut quad = vec![dphi; spec.n_phi];
    quad[0] = 0.5 * dphi;
    quad[spec.n_phi - 1] = 0.5 * dphi;
    backproject_weighted(g, model, grid, &quad, weight)
}

/// Backprojection over the data interval only, with both end samples kept
/// as distinct times (trapezoid rule). A smooth cutoff additionally tapers
/// the weight towards the interval ends. Works for any model whose domain
/// contains the data angles.
pub fn backproject_restricted(
    g: &Sinogram,
    model: &dyn MotionModel,
    grid: GridSpec,
    cutoff: &CutoffSpec,
    weight: &WeightMode,
) -> Result<ImageGrid> {
    cutoff.validate(model)?;
    let spec = g.spec();
    let [lo, hi] = spec.phi_range;
    check_angle(model, lo)?;
    check_angle(model, hi)?;
    let dphi = spec.dphi();
    let quad: Vec<f64> = (0..spec.n_phi)
        .map(|i| {
            let end = if i == 0 || i == spec.n_phi - 1 { 0.5 } else { 1.0 };
            end * dphi * cutoff.weight(spec.phi(i), lo, hi)
        })
        .collect();
    backproject_weighted(g, model, grid, &quad, weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SinogramSpec;
    use crate::motion::{counter_rotation, identity, third_rotation};

    #[test]
    fn zero_data_gives_zero_image() {
        let grid = GridSpec::square(8, 1.0).unwrap();
        let g = Sinogram::zeros(SinogramSpec::full_turn(10, 12, 1.5).unwrap()).unwrap();
        let a = backproject_periodic(&g, &identity(), grid, &WeightMode::Intensity).unwrap();
        assert!(a.values().iter().all(|&v| v == 0.0));
        let b = backproject_restricted(
            &g,
            &third_rotation(),
            grid,
            &CutoffSpec::sharp(),
            &WeightMode::Intensity,
        )
        .unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn periodic_rejects_non_periodic_models() {
        let grid = GridSpec::square(8, 1.0).unwrap();
        let g = Sinogram::zeros(SinogramSpec::full_turn(10, 12, 1.5).unwrap()).unwrap();
        let err = backproject_periodic(&g, &third_rotation(), grid, &WeightMode::Intensity);
        assert!(matches!(err, Err(Error::NotPeriodic(_))));
    }

    #[test]
    fn periodic_needs_full_turn() {
        let grid = GridSpec::square(8, 1.0).unwrap();
        let g = Sinogram::zeros(SinogramSpec::new(10, 12, [0.0, 3.0], 1.5).unwrap()).unwrap();
        assert!(backproject_periodic(&g, &identity(), grid, &WeightMode::Intensity).is_err());
    }

    #[test]
    fn constant_data_backproject_to_total_angle() {
        let grid = GridSpec::square(8, 1.0).unwrap();
        let spec = SinogramSpec::full_turn(33, 12, 2.0).unwrap();
        let g = Sinogram::from_fn(spec, |_, _| 1.0).unwrap();
        let m = counter_rotation();
        let a = backproject_periodic(&g, &m, grid, &WeightMode::Intensity).unwrap();
        let b = backproject_restricted(&g, &m, grid, &CutoffSpec::sharp(), &WeightMode::Intensity)
            .unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - std::f64::consts::TAU).abs() < 1e-12);
            assert!((x - y).abs() < 1e-12);
        }
    }
}
