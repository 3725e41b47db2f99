//! Throughput of the three hot paths: tick generation, rolling estimation,
//! and whole sweeps. The estimation benches pair the parallel entry points
//! with their sequential twins so the work-splitting overhead and speedup
//! are visible side by side; without the `parallel` feature the paired
//! benches collapse onto one code path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use market_potential::{
    rolling_b_sequential, run_simulation, run_sweep_sequential, AnalysisParams, MarketConfig,
    SweepSpec,
};
#[cfg(feature = "parallel")]
use market_potential::{rolling_b, run_sweep};

fn bench_simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    for n_ticks in [2_000usize, 20_000] {
        let config = MarketConfig {
            n_ticks,
            seed: 3,
            ..MarketConfig::default()
        };
        group.throughput(Throughput::Elements(n_ticks as u64));
        group.bench_function(format!("{n_ticks}_ticks"), |b| {
            b.iter(|| run_simulation(black_box(&config)).unwrap());
        });
    }
    group.finish();
}

fn bench_rolling_b(c: &mut Criterion) {
    let series = run_simulation(&MarketConfig {
        n_ticks: 50_000,
        seed: 3,
        ..MarketConfig::default()
    })
    .unwrap();
    let params = AnalysisParams::default();
    let n_windows = rolling_b_sequential(series.prices(), &params)
        .unwrap()
        .estimates
        .len() as u64;

    let mut group = c.benchmark_group("rolling_b");
    group.throughput(Throughput::Elements(n_windows));
    group.sample_size(30);
    group.bench_function("sequential", |b| {
        b.iter(|| rolling_b_sequential(black_box(series.prices()), &params).unwrap());
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| rolling_b(black_box(series.prices()), &params).unwrap());
    });
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        base: MarketConfig::default(),
        d_values: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
        analysis: AnalysisParams::default(),
        ticks_per_run: 20_000,
        base_seed: 3,
    };

    let mut group = c.benchmark_group("sweep_5_points_20k_ticks");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_sweep_sequential(black_box(&spec)).unwrap());
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(black_box(&spec)).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_rolling_b, bench_sweep);
criterion_main!(benches);
