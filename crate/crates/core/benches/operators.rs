//! Forward projection and backprojection on one thread versus all cores.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dynaray::motion::{nonaffine, third_rotation};
use dynaray::operators::{backproject_restricted, forward_project, CutoffSpec, WeightMode};
use dynaray::{default_phantom, GridSpec, SinogramSpec};

fn pools() -> Vec<(usize, rayon::ThreadPool)> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1];
    if n > 1 {
        sizes.push(n);
    }
    sizes
        .into_iter()
        .map(|t| (t, rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap()))
        .collect()
}

fn bench(c: &mut Criterion) {
    let grid = GridSpec::square(128, 1.0).unwrap();
    let spec = SinogramSpec::full_turn(120, 181, 2f64.sqrt()).unwrap();
    let f = default_phantom().rasterize(grid).unwrap();
    let rot = third_rotation();
    let warp = nonaffine();
    let g = forward_project(&f, &rot, spec, &WeightMode::Intensity).unwrap();

    let mut group = c.benchmark_group("operators");
    group.sample_size(10);
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("forward/third_rotation", threads), &threads, |b, _| {
            b.iter(|| pool.install(|| forward_project(black_box(&f), &rot, spec, &WeightMode::Intensity).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("forward/nonaffine", threads), &threads, |b, _| {
            b.iter(|| pool.install(|| forward_project(black_box(&f), &warp, spec, &WeightMode::MassPreserving).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("backproject/third_rotation", threads), &threads, |b, _| {
            b.iter(|| {
                pool.install(|| {
                    backproject_restricted(black_box(&g), &rot, grid, &CutoffSpec::smooth(0.15), &WeightMode::Intensity)
                        .unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
