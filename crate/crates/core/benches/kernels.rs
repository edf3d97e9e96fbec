//! Sequential against data-parallel execution of the hot kernels.
//!
//! `Exec::Sequential` takes the plain iterator path; kernels without an
//! explicit `Exec` argument are compared by running them in a one-thread
//! pool against the default pool.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use equidecomp::expansion::{edge_statistics, estimate_gap_with, AveragingOperator, GapConfig};
use equidecomp::group::sl2z_generators;
use equidecomp::par::{self, Exec};
use equidecomp::pipeline::{disjointify, EquidecomposeConfig};
use equidecomp::space::{build_model, SampledSet, SetPredicate, SpaceModel};

fn gap(c: &mut Criterion) {
    let model = Arc::new(build_model("punctured-torus", 257, 0).unwrap());
    let op = AveragingOperator::new(&model, &sl2z_generators()).unwrap();
    let cfg = GapConfig { restarts: 4, iterations: 60, tolerance: 0.0, seed: 0 };
    let mut g = c.benchmark_group("gap_estimate_q257");
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| black_box(estimate_gap_with(&op, &cfg, e)))
        });
    }
    g.finish();

    let f: Vec<f64> = (0..model.len()).map(|i| (i as f64).sin()).collect();
    let mut g = c.benchmark_group("averaging_apply_q257");
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &e| {
            b.iter(|| black_box(op.apply_with(e, &f)))
        });
    }
    g.finish();
}

fn pooled(c: &mut Criterion) {
    let model = Arc::new(build_model("punctured-torus", 401, 0).unwrap());
    let q = sl2z_generators();
    let y = SampledSet::from_predicate(&model, &SetPredicate::rect(&[0.1, 0.2], &[0.6, 0.5])).unwrap();

    let cfg = EquidecomposeConfig::torus_example(64, 4).unwrap();
    let torus = Arc::new(SpaceModel::build(&cfg.model).unwrap());
    let r = cfg.gap.expanding_set(0.1125, cfg.size_cap).unwrap();
    let s = cfg.cover.product(&r, cfg.size_cap).unwrap().union(&r.product(&cfg.cover, cfg.size_cap).unwrap()).unwrap();
    let a = SampledSet::from_predicate(&torus, &cfg.a).unwrap();
    let bset = SampledSet::from_predicate(&torus, &cfg.b).unwrap();

    for (label, threads) in [("Sequential", 1usize), ("Parallel", 0)] {
        c.bench_function(&format!("edge_statistics_q401/{label}"), |b| {
            b.iter(|| par::with_threads(threads, || black_box(edge_statistics(&model, &q, &y).unwrap())))
        });
        c.bench_function(&format!("graphing_build_q64/{label}"), |b| {
            b.iter(|| par::with_threads(threads, || black_box(disjointify(&a, &bset, &s).unwrap())))
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = gap, pooled
}
criterion_main!(benches);
