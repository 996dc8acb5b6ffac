use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gls_obstacle::estimator::element_indicators;
use gls_obstacle::solver::{CholeskyFactor, CholeskySymbolic};
use gls_obstacle::{newton_solve, ObstacleOperator, SolverOptions};
use gls_obstacle_bench::smooth_fixture;

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [8, 32] {
        let fx = smooth_fixture(n);
        let op = ObstacleOperator::new(&fx.space, &fx.data);
        group.bench_with_input(BenchmarkId::new("residual", n), &n, |b, _| b.iter(|| op.residual(black_box(&fx.state))));
        group.bench_with_input(BenchmarkId::new("jacobian", n), &n, |b, _| b.iter(|| op.jacobian(black_box(&fx.state))));
        group.bench_with_input(BenchmarkId::new("indicators", n), &n, |b, _| {
            b.iter(|| element_indicators(black_box(&fx.state), &fx.data, &fx.space))
        });
    }
    group.finish();
}

fn cholesky(c: &mut Criterion) {
    let mut group = c.benchmark_group("cholesky");
    group.sample_size(20);
    for n in [16, 48] {
        let fx = smooth_fixture(n);
        let op = ObstacleOperator::new(&fx.space, &fx.data);
        let jac = op.jacobian(&fx.state);
        let rhs = op.residual(&fx.state).0;
        group.bench_with_input(BenchmarkId::new("analyze", n), &n, |b, _| {
            b.iter(|| CholeskySymbolic::analyze(jac.pattern().clone()))
        });
        let sym = Arc::new(CholeskySymbolic::analyze(jac.pattern().clone()));
        group.bench_with_input(BenchmarkId::new("factorize", n), &n, |b, _| {
            b.iter(|| CholeskyFactor::factorize(sym.clone(), &jac).unwrap())
        });
        let factor = CholeskyFactor::factorize(sym.clone(), &jac).unwrap();
        group.bench_with_input(BenchmarkId::new("solve", n), &n, |b, _| b.iter(|| factor.solve(black_box(&rhs))));
    }
    group.finish();
}

fn mesh(c: &mut Criterion) {
    let fx = smooth_fixture(32);
    let mesh = fx.space.mesh();
    let half: Vec<usize> = (0..mesh.n_cells()).step_by(2).collect();
    c.bench_function("refine/half_of_n32", |b| b.iter(|| mesh.refine(black_box(&half))));
}

fn newton(c: &mut Criterion) {
    let mut group = c.benchmark_group("newton");
    group.sample_size(10);
    let fx = smooth_fixture(16);
    let opts = SolverOptions::default();
    group.bench_function("smooth_n16", |b| b.iter(|| newton_solve(&fx.data, &fx.space, None, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, assembly, cholesky, mesh, newton);
criterion_main!(benches);
