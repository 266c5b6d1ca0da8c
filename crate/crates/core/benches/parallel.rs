//! Sequential against rayon execution for the data-parallel kernels.
//!
//! Build with `--no-default-features` to confirm that `Parallel` falls back
//! to the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kdist_core::experiments::{sweep_t2, ExperimentConfig};
use kdist_core::full::{sample_many, FullWalk};
use kdist_core::{Execution, KDistinctnessInstance, Operator, ProblemParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn walk(n: usize, exec: Execution) -> FullWalk {
    let params = ProblemParams::new(n, 2).unwrap();
    let inst = KDistinctnessInstance::with_collision(n, &[1, n]).unwrap();
    FullWalk::new(&params, &inst).unwrap().with_execution(exec)
}

fn reflections(c: &mut Criterion) {
    let mut group = c.benchmark_group("beta_reflection");
    group.sample_size(20);
    for n in [16, 18] {
        for (name, exec) in MODES {
            let w = walk(n, exec);
            let mut state = w.uniform_state();
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| w.apply(Operator::Beta, black_box(&mut state)))
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_t2");
    group.sample_size(10);
    let config = ExperimentConfig {
        n: Some(1_000_000),
        k: Some(2),
        ..Default::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| sweep_t2(black_box(&config), exec).unwrap()));
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    let w = walk(12, Execution::default());
    let run = w.run(2, 3).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                sample_many(
                    w.table(),
                    &run.state,
                    w.instance(),
                    run.marked_probability,
                    200_000,
                    7,
                    exec,
                )
            })
        });
    }
    group.finish();
}

criterion_group!(benches, reflections, sweeps, sampling);
criterion_main!(benches);
