use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use singpack::bubbling::{enumerate_decompositions, BlowupClass, Constraints};
use singpack::par::Execution;
use singpack::verify::{self, SuiteConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn basin_volume(c: &mut Criterion) {
    let chart = verify::basin_chart();
    let mut group = c.benchmark_group("basin_volume_mc");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 200_000), &exec, |b, &exec| {
            b.iter(|| chart.basin_volume_mc(black_box(200_000), 0, exec).unwrap())
        });
    }
    group.finish();
}

fn pullback_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("pullback_grid");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SuiteConfig { exec, ..SuiteConfig::default() };
        group.bench_with_input(BenchmarkId::new(name, "10^4 x 9"), &cfg, |b, cfg| {
            b.iter(|| verify::pullback(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let target = BlowupClass::new(6, vec![2, 2, 1]);
    let mut group = c.benchmark_group("enumerate_decompositions");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "6L-2E1-2E2-E3"), &exec, |b, &exec| {
            b.iter(|| enumerate_decompositions(black_box(&target), 4, &Constraints::default(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, basin_volume, pullback_grid, enumeration);
criterion_main!(benches);
