use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nhphase_bench::{dense_matrix, precessing};
use nhphase_core::two_level::sampled_path;
use nhphase_core::{adiabaticity_eta, build_system, build_system_path, monodromy, periodic_initial_condition};

fn eigensystem(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_system");
    for n in [2, 4, 8] {
        let a = dense_matrix(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| build_system(black_box(a), 1e-10).unwrap())
        });
    }
    g.finish();
}

fn frame_path(c: &mut Criterion) {
    let path = sampled_path(&precessing(0.01), 2048).unwrap();
    c.bench_function("build_system_path/2048", |b| b.iter(|| build_system_path(black_box(&path), 1e-10).unwrap()));
    let sp = build_system_path(&path, 1e-10).unwrap();
    c.bench_function("adiabaticity_eta/2048", |b| b.iter(|| adiabaticity_eta(black_box(&sp)).unwrap()));
    c.bench_function("periodic_initial_condition/16384", |b| {
        b.iter(|| periodic_initial_condition(black_box(&sp), 1, 16384).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let p = precessing(0.01);
    c.bench_function("monodromy/16384", |b| b.iter(|| monodromy(black_box(&p), 16384).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = eigensystem, frame_path, propagation
}
criterion_main!(benches);
