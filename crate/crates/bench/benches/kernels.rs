use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use laxlab_bench::{kink_solver, sampled_kink, square_grid};
use laxlab_core::sine_gordon::evolve;
use laxlab_core::{
    path_defect, propagate_frames, residuals_structure, rodrigues_exp, zero_curvature_residuals, Mat3, SkewTriple,
};
use std::hint::black_box;

fn exponential(c: &mut Criterion) {
    let w = SkewTriple::new(0.3, -0.7, 1.1);
    c.bench_function("rodrigues_exp", |b| b.iter(|| rodrigues_exp(black_box(w))));
}

fn residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("residuals");
    for m in [101, 201] {
        let (coeffs, second) = sampled_kink(square_grid(m));
        group.bench_with_input(BenchmarkId::new("structure", m), &m, |b, _| {
            b.iter(|| residuals_structure(&coeffs, &second).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("zero_curvature", m), &m, |b, _| {
            b.iter(|| zero_curvature_residuals(&coeffs, &second).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let state = kink_solver(2001, 100);
    c.bench_function("evolve_2001x100", |b| b.iter(|| evolve(&state, 100).unwrap()));
}

fn frames(c: &mut Criterion) {
    let (coeffs, second) = sampled_kink(square_grid(201));
    c.bench_function("propagate_frames_201", |b| {
        b.iter(|| propagate_frames(&coeffs, &second, Mat3::IDENTITY).unwrap())
    });
    c.bench_function("path_defect_201", |b| b.iter(|| path_defect(&coeffs, &second, Mat3::IDENTITY).unwrap()));
}

criterion_group!(benches, exponential, residuals, solver, frames);
criterion_main!(benches);
