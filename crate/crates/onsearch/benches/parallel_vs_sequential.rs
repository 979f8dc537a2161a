//! Parallel vs. sequential execution of the doubling stress workload.
//!
//! Run with `cargo bench -p onsearch`. The workload is a scaled-down
//! worst-case sweep: several hundred random curves, each evaluated at every
//! stopping time. Both paths share `exec::map_indexed*`, so the comparison
//! isolates the cost and benefit of the thread pool.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use onsearch::algorithms::run_double;
use onsearch::curve::OptCurve;
use onsearch::distributions::random_monotone_curve;
use onsearch::exec;

const CURVES: usize = 300;
const HORIZON: u32 = 150;

fn build_curves() -> Vec<OptCurve> {
    (0..CURVES)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            random_monotone_curve(&mut rng, HORIZON, 10.0, 0.5, 2.5).expect("valid parameters")
        })
        .collect()
}

fn worst_ratio(curve: &OptCurve) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for t in 1..=curve.horizon() {
        let cr = run_double(curve, t)
            .and_then(|record| record.competitive_ratio(curve))
            .expect("stop times are in range");
        worst = worst.max(cr);
    }
    worst
}

fn bench_double_sweep(c: &mut Criterion) {
    let curves = build_curves();
    let mut group = c.benchmark_group("double_sweep");
    group.sample_size(20);

    group.bench_function("parallel", |b| {
        b.iter_batched(
            || curves.clone(),
            |curves| exec::map_indexed(curves.len(), |i| worst_ratio(&curves[i])),
            BatchSize::LargeInput,
        )
    });

    group.bench_function("sequential", |b| {
        b.iter_batched(
            || curves.clone(),
            |curves| exec::map_indexed_seq(curves.len(), |i| worst_ratio(&curves[i])),
            BatchSize::LargeInput,
        )
    });

    group.finish();
}

criterion_group!(benches, bench_double_sweep);
criterion_main!(benches);
