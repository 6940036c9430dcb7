use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wgqed::photonstats::{g2_oracle, g2_transmitted, DriveParams};
use wgqed::Detuning;
use wgqed_bench::{delays, detunings, device};

fn spectrum_sweep(c: &mut Criterion) {
    let (_, d) = device();
    let mut g = c.benchmark_group("device_spectrum");
    for n in [101, 401, 1601] {
        let grid = detunings(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| d.normalized_spectrum(black_box(grid)).unwrap())
        });
    }
    g.finish();
}

fn g2(c: &mut Criterion) {
    let (p, _) = device();
    let tau = delays(201);
    c.bench_function("g2_analytic_201", |b| {
        b.iter(|| g2_transmitted(black_box(&p), Detuning(0.0), &tau).unwrap())
    });
    let drive = DriveParams::from_saturation(&p, 1e-3, Detuning(0.0)).unwrap();
    let short = delays(33);
    c.bench_function("g2_oracle_33", |b| b.iter(|| g2_oracle(black_box(&p), &drive, &short).unwrap()));
}

criterion_group!(benches, spectrum_sweep, g2);
criterion_main!(benches);
