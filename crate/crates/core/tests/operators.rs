mod common;

use std::f64::consts::{SQRT_2, TAU};

use dynaray::motion::{counter_rotation, identity, nonaffine, third_rotation, MotionModel};
use dynaray::operators::{
    apply_filter, backproject_periodic, backproject_restricted, forward_project, reconstruct,
    CustomWeight, CutoffSpec, FilterSpec, PipelineSpec, ReconstructionInput, WeightMode,
};
use dynaray::{default_phantom, Ellipse, EllipsePhantom, GridSpec, ImageGrid, Sinogram, SinogramSpec, Vec2};
use rand::Rng;

fn smooth_image(seed: u64, n: usize) -> ImageGrid {
    let bumps = common::random_bumps(&mut common::rng(seed), 5, 0.5);
    ImageGrid::from_fn(GridSpec::square(n, 1.0).unwrap(), |p| common::eval_bumps(&bumps, p)).unwrap()
}

#[test]
fn static_forward_matches_the_analytic_sinogram() {
    let phantom = default_phantom();
    let f = phantom.rasterize(GridSpec::square(256, 1.0).unwrap()).unwrap();
    let spec = SinogramSpec::full_turn(300, 450, SQRT_2).unwrap();
    let g = forward_project(&f, &identity(), spec, &WeightMode::Intensity).unwrap();
    let exact = Sinogram::from_fn(spec, |phi, s| phantom.analytic_static_radon(phi, s)).unwrap();
    let err = common::relative_l2(g.values(), exact.values());
    assert!(err < 0.02, "relative L2 {err}");
}

#[test]
fn counter_rotation_is_a_resampled_static_scan() {
    let phantom = default_phantom();
    let f = phantom.rasterize(GridSpec::square(256, 1.0).unwrap()).unwrap();
    let spec = SinogramSpec::full_turn(121, 200, SQRT_2).unwrap();
    let dynamic = forward_project(&f, &counter_rotation(), spec, &WeightMode::Intensity).unwrap();
    // static data at 2φ mod 2π
    let resampled = Sinogram::from_fn(spec, |phi, s| phantom.analytic_static_radon(2.0 * phi % TAU, s)).unwrap();
    let err = common::relative_l2(dynamic.values(), resampled.values());
    assert!(err < 0.01, "relative L2 {err}");
}

#[test]
fn forward_projection_of_a_centered_disk() {
    let disk = EllipsePhantom::new(vec![Ellipse::disk((0.0, 0.0), 0.4, 1.0)]);
    let f = disk.rasterize(GridSpec::square(256, 1.0).unwrap()).unwrap();
    let spec = SinogramSpec::full_turn(300, 451, SQRT_2).unwrap();
    for model in [&identity() as &dyn MotionModel, &counter_rotation(), &third_rotation()] {
        let g = forward_project(&f, model, spec, &WeightMode::Intensity).unwrap();
        for i in 0..spec.n_phi {
            let v = g.get(i, 225);
            assert!((v - 0.8).abs() < 0.008, "{} row {i}: {v}", model.name());
        }
    }
}

#[test]
fn operators_are_linear() {
    let grid = GridSpec::square(48, 1.0).unwrap();
    let spec = SinogramSpec::full_turn(40, 64, 1.5).unwrap();
    let a = smooth_image(1, 48);
    let b = smooth_image(2, 48);
    let (alpha, beta) = (0.7, -1.3);
    let combo = ImageGrid::from_values(
        grid,
        a.values().iter().zip(b.values()).map(|(x, y)| alpha * x + beta * y).collect(),
    )
    .unwrap();
    let model = nonaffine();
    let pipe = PipelineSpec {
        sinogram: spec,
        grid,
        filter: FilterSpec::ramp(),
        cutoff: CutoffSpec::smooth(0.15),
        weight: WeightMode::MassPreserving,
    };
    let la = reconstruct(ReconstructionInput::Image(&a), &model, &pipe).unwrap();
    let lb = reconstruct(ReconstructionInput::Image(&b), &model, &pipe).unwrap();
    let lc = reconstruct(ReconstructionInput::Image(&combo), &model, &pipe).unwrap();
    let scale = lc.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for ((x, y), z) in la.values().iter().zip(lb.values()).zip(lc.values()) {
        assert!((alpha * x + beta * y - z).abs() <= 1e-10 * scale);
    }

    let ga = forward_project(&a, &model, spec, &WeightMode::Intensity).unwrap();
    let gb = forward_project(&b, &model, spec, &WeightMode::Intensity).unwrap();
    let gc = forward_project(&combo, &model, spec, &WeightMode::Intensity).unwrap();
    let scale = gc.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for ((x, y), z) in ga.values().iter().zip(gb.values()).zip(gc.values()) {
        assert!((alpha * x + beta * y - z).abs() <= 1e-10 * scale);
    }
}

#[test]
fn backprojection_is_the_dual_for_periodic_motion() {
    let model = counter_rotation();
    let grid = GridSpec::square(96, 1.0).unwrap();
    let spec = SinogramSpec::full_turn(240, 193, 1.5).unwrap();
    let mut rng = common::rng(11);
    let f = smooth_image(3, 96);
    let (c, w) = (rng.gen_range(-0.3..0.3), 0.25);
    let g = Sinogram::from_fn(spec, |phi, s| {
        (1.2 + (2.0 * phi).sin()) * (-(s - c) * (s - c) / (2.0 * w * w)).exp()
    })
    .unwrap();
    let lhs = common::sinogram_dot(&forward_project(&f, &model, spec, &WeightMode::Intensity).unwrap(), &g);
    let rhs = common::image_dot(&f, &backproject_periodic(&g, &model, grid, &WeightMode::Intensity).unwrap());
    assert!((lhs - rhs).abs() / lhs.abs() < 0.005, "{lhs} vs {rhs}");
}

#[test]
fn restricted_and_periodic_backprojections_agree_for_periodic_motion() {
    let model = counter_rotation();
    let grid = GridSpec::square(64, 1.0).unwrap();
    let spec = SinogramSpec::full_turn(180, 128, 1.5).unwrap();
    let f = smooth_image(4, 64);
    let g = forward_project(&f, &model, spec, &WeightMode::Intensity).unwrap();
    let a = backproject_periodic(&g, &model, grid, &WeightMode::Intensity).unwrap();
    let b = backproject_restricted(&g, &model, grid, &CutoffSpec::sharp(), &WeightMode::Intensity).unwrap();
    assert!(b.relative_l2_error(&a).unwrap() < 0.005);
}

#[test]
fn static_backprojection_of_a_point_is_radially_symmetric() {
    let n = 129;
    let grid = GridSpec::square(n, 1.0).unwrap();
    let mut values = vec![0.0; n * n];
    values[(n / 2) * n + n / 2] = 1.0;
    let f = ImageGrid::from_values(grid, values).unwrap();
    let spec = SinogramSpec::full_turn(361, 257, SQRT_2).unwrap();
    let g = forward_project(&f, &identity(), spec, &WeightMode::Intensity).unwrap();
    let b = backproject_periodic(&g, &identity(), grid, &WeightMode::Intensity).unwrap();
    // compare pixels at equal radius along the axes and diagonals
    let c = n / 2;
    let mut worst = 0.0f64;
    for r in [6usize, 12, 20] {
        let axis = [b.get(c + r, c), b.get(c - r, c), b.get(c, c + r), b.get(c, c - r)];
        let mean = axis.iter().sum::<f64>() / 4.0;
        for v in axis {
            worst = worst.max((v - mean).abs() / mean);
        }
        let d = (r as f64 / SQRT_2).round() as usize;
        let radius = d as f64 * SQRT_2;
        let diag = [b.get(c + d, c + d), b.get(c - d, c - d), b.get(c + d, c - d), b.get(c - d, c + d)];
        let dmean = diag.iter().sum::<f64>() / 4.0;
        for v in diag {
            worst = worst.max((v - dmean).abs() / dmean);
        }
        // 1/r decay of the unfiltered backprojection
        let scaled = dmean * radius / (mean * r as f64);
        assert!((scaled - 1.0).abs() < 0.1, "r={r}: {scaled}");
    }
    assert!(worst < 0.02, "asymmetry {worst}");
}

#[test]
fn static_pipeline_matches_the_classical_oracle() {
    let grid = GridSpec::square(64, 1.0).unwrap();
    let f = default_phantom().rasterize(grid).unwrap();
    let spec = SinogramSpec::full_turn(90, 128, SQRT_2).unwrap();
    let g = forward_project(&f, &identity(), spec, &WeightMode::Intensity).unwrap();
    let pipe = PipelineSpec {
        sinogram: spec,
        grid,
        filter: FilterSpec::ram_lak(),
        cutoff: CutoffSpec::sharp(),
        weight: WeightMode::Intensity,
    };
    let recon = reconstruct(ReconstructionInput::Sinogram(&g), &identity(), &pipe).unwrap();
    let oracle = common::classical_fbp(&g, grid);
    assert!(recon.relative_l2_error(&oracle).unwrap() < 1e-10);
}

#[test]
fn ramp_matches_direct_convolution_on_a_triangle() {
    let spec = SinogramSpec::new(2, 201, [0.0, 1.0], 1.0).unwrap();
    let g = Sinogram::from_fn(spec, |_, s| (0.3 - s.abs()).max(0.0)).unwrap();
    let out = apply_filter(&g, &FilterSpec::ram_lak()).unwrap();
    let direct = common::ram_lak_direct(g.row(0), spec.ds());
    let err = common::relative_l2(out.row(0), &direct);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn smooth_cutoff_changes_little_for_periodic_data_away_from_the_ends() {
    // With a periodic model the tapered ends are a small part of the turn,
    // so smooth and sharp reconstructions differ only mildly.
    let grid = GridSpec::square(64, 1.0).unwrap();
    let f = default_phantom().rasterize(grid).unwrap();
    let spec = SinogramSpec::full_turn(120, 128, SQRT_2).unwrap();
    let mk = |cutoff| PipelineSpec {
        sinogram: spec,
        grid,
        filter: FilterSpec::ramp(),
        cutoff,
        weight: WeightMode::Intensity,
    };
    let m = counter_rotation();
    let sharp = reconstruct(ReconstructionInput::Image(&f), &m, &mk(CutoffSpec::sharp())).unwrap();
    let smooth = reconstruct(ReconstructionInput::Image(&f), &m, &mk(CutoffSpec::smooth(0.15))).unwrap();
    let d = smooth.relative_l2_error(&sharp).unwrap();
    assert!(d > 0.0 && d < 0.2, "{d}");
}

#[test]
fn custom_weights_enter_both_sides() {
    let grid = GridSpec::square(32, 1.0).unwrap();
    let spec = SinogramSpec::full_turn(30, 48, 1.5).unwrap();
    let f = smooth_image(5, 32);
    let m = counter_rotation();
    let one = WeightMode::Custom(CustomWeight::new(|_, _| 1.0));
    let a = forward_project(&f, &m, spec, &one).unwrap();
    let b = forward_project(&f, &m, spec, &WeightMode::Intensity).unwrap();
    assert_eq!(a, b);
    let bump = WeightMode::Custom(CustomWeight::new(|phi, x: Vec2| 1.0 + 0.5 * phi.cos() * x.x));
    let c = backproject_periodic(&a, &m, grid, &bump).unwrap();
    let d = backproject_periodic(&a, &m, grid, &WeightMode::Intensity).unwrap();
    assert!(c.relative_l2_error(&d).unwrap() > 1e-3);
}
