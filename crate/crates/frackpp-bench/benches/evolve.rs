//! Propagator construction and stepping benchmarks on a mid-size graded mesh.

use criterion::{criterion_group, criterion_main, Criterion};
use frackpp_core::{
    ConvolutionPropagator, Field, GradedGrid, GradedGridSpec, ReactionTerm, StableKernel,
};
use std::sync::Arc;

fn mesh() -> Arc<GradedGrid> {
    Arc::new(GradedGrid::build(GradedGridSpec::symmetric(4.0, 0.04, 1.01, 1.0e4)).unwrap())
}

fn bench_propagator_build(c: &mut Criterion) {
    let grid = mesh();
    let kernel = StableKernel::cauchy(1).unwrap();
    let mut group = c.benchmark_group("propagator_build");
    group.sample_size(10);
    group.bench_function(format!("cauchy_{}_nodes", grid.len()), |b| {
        b.iter(|| ConvolutionPropagator::build(grid.clone(), &kernel, 0.05).unwrap())
    });
    group.finish();
}

fn bench_stepping(c: &mut Criterion) {
    let grid = mesh();
    let kernel = StableKernel::cauchy(1).unwrap();
    let prop = ConvolutionPropagator::build(grid.clone(), &kernel, 0.05).unwrap();
    let field = Field::from_fn(grid.clone(), |x| ((1.5 - x.abs()) / 1.5).clamp(0.0, 1.0), 0.0, 0.0);
    let logistic = ReactionTerm::logistic();
    let mut group = c.benchmark_group("stepping");
    group.bench_function(format!("linear_step_{}_nodes", grid.len()), |b| {
        b.iter(|| prop.apply(&field).unwrap())
    });
    group.bench_function("strang_step", |b| {
        b.iter(|| {
            let mut stats = frackpp_core::ClampStats::default();
            frackpp_core::strang_step(&field, &prop, &logistic, &mut stats).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_propagator_build, bench_stepping);
criterion_main!(benches);
