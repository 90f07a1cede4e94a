// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ltm_core::model::preset;
use ltm_core::sensitivity::{dc_sensitivity_curve, linspace};
use ltm_core::steady::solve_steady_state;
use ltm_core::{Execution, Preset};

fn steady_sweep(c: &mut Criterion) {
    let cfg = preset(Preset::Baseline);
    let deltas = linspace(-150e6, 150e6, 256);
    let mut group = c.benchmark_group("steady_state_sweep_256");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, e| {
                b.iter(|| {
                    e.map(&deltas, |d| {
                        solve_steady_state(&cfg.with_delta(*d)).map(|s| s.n)
                    })
                })
            },
        );
    }
    group.finish();
}

fn sensitivity_curve(c: &mut Criterion) {
    let cfg = preset(Preset::HighSensitivity);
    let fields = linspace(-300e-6, 300e-6, 64);
    let mut group = c.benchmark_group("dc_sensitivity_curve_64");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, e| b.iter(|| dc_sensitivity_curve(&cfg, &fields, *e).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, steady_sweep, sensitivity_curve);
criterion_main!(benches);
