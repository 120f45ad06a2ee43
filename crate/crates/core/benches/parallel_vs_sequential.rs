//! Data-parallel kernels on a one-thread pool and on the default pool.
//! Built with `--no-default-features` both rows measure the sequential
//! fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;
use slm_oam::analysis::ModeSorter;
use slm_oam::cli::config::RunConfig;
use slm_oam::hologram::render;
use slm_oam::lg::lg_field;
use slm_oam::propagation::{propagate, PropagationPlan};
use slm_oam::{BeamParams, ModeIndex, PhysicalGrid};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn hologram(c: &mut Criterion) {
    let cfg = RunConfig::from_json(r#"{ "hologram": { "l": 3, "lens_focal_mm": 131, "ky_rad_per_m": 2e4 } }"#)
        .unwrap()
        .resolved()
        .unwrap();
    let spec = cfg.hologram_spec().unwrap();
    let grid = cfg.slm_grid().unwrap();
    let mut group = c.benchmark_group("render_1024x768");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(render(&spec, &grid))))
        });
    }
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let grid = PhysicalGrid::square(512, 19.5e-3 / 1024.0).unwrap();
    let beam = BeamParams::new(0.6e-3, 702e-9).unwrap();
    let field = lg_field(&grid, 0.0, ModeIndex::new(1, 4), &beam, (0.0, 0.0));
    let plan = PropagationPlan::new(0.2);
    let mut group = c.benchmark_group("propagate_512");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(propagate(&field, &plan).unwrap())))
        });
    }
    group.finish();
}

fn crosstalk(c: &mut Criterion) {
    let sorter = ModeSorter::desk(1).unwrap();
    let modes: Vec<i32> = (-3..=3).collect();
    let mut group = c.benchmark_group("crosstalk_7x7");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(sorter.crosstalk_matrix(&modes, &modes).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, hologram, propagation, crosstalk);
criterion_main!(benches);
