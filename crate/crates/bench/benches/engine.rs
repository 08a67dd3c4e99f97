// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fslnet::workload::{build_matmul_program, seeded_operands};
use fslnet::SimConfig;
use fslnet_bench::{eight_core, KINDS};

fn matmul(c: &mut Criterion) {
    let cfg = SimConfig::default();
    let mut group = c.benchmark_group("matmul");
    group.sample_size(10);
    for size in [8usize, 32] {
        let (a, b) = seeded_operands(size, 1);
        for kind in KINDS {
            let t = eight_core(kind);
            group.bench_with_input(BenchmarkId::new(kind.name(), size), &size, |bench, _| {
                bench.iter(|| {
                    build_matmul_program(&a, &b, &t, &cfg)
                        .unwrap()
                        .run(&cfg, &t)
                        .unwrap()
                        .metrics
                        .total_cycles
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, matmul);
criterion_main!(benches);
