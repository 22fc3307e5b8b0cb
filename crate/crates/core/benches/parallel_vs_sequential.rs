//! One worker against all available workers on the 1-D threshold family.
//!
//! Build with `--no-default-features` to measure the sequential fallback,
//! where every worker count runs on the calling thread.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use equihybrid::parallel::available_workers;
use equihybrid::problems::{make_paper_1d, Paper1DSpec};
use equihybrid::solvers::solve_mann;
use equihybrid::{ParallelPlan, SolverConfig};
use std::hint::black_box;

fn worker_counts() -> Vec<usize> {
    let mut counts = vec![1, available_workers().max(2)];
    counts.dedup();
    counts
}

fn paper_family(c: &mut Criterion) {
    let mut group = c.benchmark_group("paper_1d_mann");
    group.sample_size(10);
    for size in [10_000, 50_000] {
        let spec = Paper1DSpec::new(size, size);
        let problem = make_paper_1d(&spec).unwrap();
        for workers in worker_counts() {
            let cfg = SolverConfig {
                workers,
                max_iter: 5,
                ..spec.solver_config()
            };
            group.bench_with_input(BenchmarkId::new(format!("workers={workers}"), size), &cfg, |b, cfg| {
                b.iter(|| solve_mann(black_box(&problem), cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn plan_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan_map");
    let len = 200_000;
    for workers in worker_counts() {
        let plan = ParallelPlan::new(workers).unwrap();
        group.bench_with_input(BenchmarkId::new("workers", workers), &plan, |b, plan| {
            b.iter(|| plan.map(len, |i| (i as f64).sqrt().sin()))
        });
    }
    group.finish();
}

criterion_group!(benches, paper_family, plan_map);
criterion_main!(benches);
