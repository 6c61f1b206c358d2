//! Microbenchmarks for the hot paths: the master-equation right-hand
//! side, the pair concurrence, the dark-model eigendecomposition, and a
//! short end-to-end propagation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use plexciton::analytic::ndark_build;
use plexciton::dynamics::rhs;
use plexciton::{
    concurrence, initial_state, partial_trace_pair, propagate, InitialState,
    IntegratorConfig, Model, ObservableSet, SystemSpec,
};

fn pumped_model() -> Model {
    Model::new(SystemSpec::resonant(&[12.8, 24.9], 186.0, 25)).unwrap()
}

fn bench_rhs(c: &mut Criterion) {
    let model = pumped_model();
    let rho = initial_state(&InitialState::SingleExcited(0), &model.basis).unwrap();
    c.bench_function("rhs_dim100", |b| {
        b.iter(|| rhs(black_box(0.0), black_box(&rho.mat), &model, None).unwrap())
    });
}

fn bench_concurrence(c: &mut Criterion) {
    let model = Model::new(SystemSpec::resonant(&[12.5, 21.650635], 100.0, 3)).unwrap();
    let rho = initial_state(&InitialState::SingleExcited(0), &model.basis).unwrap();
    let red = partial_trace_pair(&rho.mat, 0, 1, &model.basis).unwrap();
    c.bench_function("pair_concurrence", |b| {
        b.iter(|| concurrence(black_box(&red)).unwrap())
    });
}

fn bench_ndark_build(c: &mut Criterion) {
    let mut g = vec![10.0; 150];
    g[0] = 10.0 / 1.05;
    c.bench_function("ndark_build_n150", |b| {
        b.iter(|| ndark_build(black_box(&g), black_box(100.0)).unwrap())
    });
}

fn bench_propagate(c: &mut Criterion) {
    let model = Model::new(SystemSpec::resonant(&[12.5, 21.650635], 100.0, 3)).unwrap();
    let init = initial_state(&InitialState::SingleExcited(0), &model.basis).unwrap();
    let obs = ObservableSet::dark_defaults(&model.basis);
    let config = IntegratorConfig {
        stride_fs: 10.0,
        ..IntegratorConfig::default()
    };
    c.bench_function("propagate_dark_50fs", |b| {
        b.iter(|| propagate(black_box(&init), &model, None, &config, 50.0, &obs).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_rhs,
    bench_concurrence,
    bench_ndark_build,
    bench_propagate
);
criterion_main!(kernels);
