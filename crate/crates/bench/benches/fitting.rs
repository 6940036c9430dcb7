use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use wgqed::fitting::{fit_auto, LineShape};
use wgqed_bench::device_spectrum;

fn fits(c: &mut Criterion) {
    let s = device_spectrum(401);
    c.bench_function("fit_lorentzian_401", |b| {
        b.iter(|| fit_auto(LineShape::Lorentzian, black_box(&s)).unwrap())
    });
    c.bench_function("fit_fano_401", |b| b.iter(|| fit_auto(LineShape::Fano, black_box(&s)).unwrap()));
}

criterion_group!(benches, fits);
criterion_main!(benches);
