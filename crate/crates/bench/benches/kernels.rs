use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use lpharmonic_core::function::{dp_energy, dp_energy_gradient};
use lpharmonic_core::inequalities::{gerl_ratio_search, z_example, DEFAULT_CAUCHY_EPS};
use lpharmonic_core::solver::solve_dirichlet;
use lpharmonic_core::spectral::{construct_harmonic, operator_norm_estimate, Backend};
use lpharmonic_core::{make_group, GraphFunction, GroupSpec, SolverOptions};

fn kernels(c: &mut Criterion) {
    let ball = make_group(GroupSpec::Free { rank: 2 }).unwrap().build_ball(8).unwrap().into_shared();
    let f = GraphFunction::from_fn(ball.clone(), |i| ((i * 7919) % 1000) as f64 / 1000.0).unwrap();

    c.bench_function("build_ball free:2 R=8", |b| {
        b.iter(|| make_group(GroupSpec::Free { rank: 2 }).unwrap().build_ball(black_box(8)).unwrap())
    });
    c.bench_function("dp_energy p=1.5 free:2 R=8", |b| b.iter(|| dp_energy(black_box(&f), 1.5).unwrap()));
    c.bench_function("gradient p=3 free:2 R=8", |b| b.iter(|| dp_energy_gradient(black_box(&f), 3.0).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let ball = make_group(GroupSpec::FreeAbelian { rank: 2 }).unwrap().build_ball(10).unwrap().into_shared();
    let bv: BTreeMap<usize, f64> = ball.boundary().into_iter().map(|i| (i, (i % 5) as f64)).collect();
    let mut group = c.benchmark_group("solve_dirichlet z^2 R=10");
    group.sample_size(10);
    for p in [1.5, 2.0, 3.0] {
        group.bench_function(format!("p={p}"), |b| {
            b.iter_batched(|| bv.clone(), |bv| solve_dirichlet(&ball, &bv, p, &SolverOptions::default()).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let ball = make_group(GroupSpec::Free { rank: 2 }).unwrap().build_ball(8).unwrap();
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    group.bench_function("norm estimate free:2 R=8", |b| b.iter(|| operator_norm_estimate(&ball, 2.0, 2000).unwrap()));
    group.bench_function("harmonic free:2 R=45 K=40", |b| {
        b.iter(|| construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 45, 0, 40, Backend::Quotient).unwrap())
    });
    group.finish();
}

fn inequalities(c: &mut Criterion) {
    let ball = make_group(GroupSpec::Free { rank: 2 }).unwrap().build_ball(6).unwrap().into_shared();
    let mut group = c.benchmark_group("inequalities");
    group.sample_size(10);
    group.bench_function("gerl free:2 R=6 100 trials", |b| b.iter(|| gerl_ratio_search(&ball, 2.0, 100, 1).unwrap()));
    group.bench_function("z example N=1e6", |b| b.iter(|| z_example(2.0, 3.0, 1_000_000, DEFAULT_CAUCHY_EPS).unwrap()));
    group.finish();
}

criterion_group!(benches, kernels, solvers, spectral, inequalities);
criterion_main!(benches);
