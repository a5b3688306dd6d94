use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmwmx::estimators::{gmwmx, GmwmOptions};
use gmwmx::linalg::{toeplitz_whiten, ToeplitzMatvec};
use gmwmx::wavelet::{default_levels, modwt_haar};
use gmwmx_bench::{nominal_noise, nominal_series};
use nalgebra::DMatrix;

const SIZES: [usize; 3] = [1 << 11, 1 << 12, 1 << 13];

fn modwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("modwt_haar");
    for n in SIZES {
        let (y, _) = nominal_series(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &y, |b, y| {
            b.iter(|| modwt_haar(black_box(y), default_levels(y.len())).unwrap())
        });
    }
    group.finish();
}

fn theoretical_wv(c: &mut Criterion) {
    let model = nominal_noise();
    let mut group = c.benchmark_group("theoretical_wv");
    for levels in [8, 10] {
        group.bench_with_input(BenchmarkId::new("closed_form", levels), &levels, |b, &j| {
            b.iter(|| model.theoretical_wv_closed_form(black_box(j)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadratic_form", levels), &levels, |b, &j| {
            b.iter(|| model.theoretical_wv(black_box(j)).unwrap())
        });
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let family = nominal_noise().family();
    let opts = GmwmOptions::default();
    let mut group = c.benchmark_group("gmwmx");
    group.sample_size(10);
    for n in SIZES {
        let (y, design) = nominal_series(n);
        for iterations in [1, 2] {
            group.bench_with_input(BenchmarkId::new(format!("pass{iterations}"), n), &n, |b, _| {
                b.iter(|| gmwmx(black_box(&y), &design, &family, iterations, 0.05, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn toeplitz(c: &mut Criterion) {
    let model = nominal_noise();
    let mut group = c.benchmark_group("toeplitz");
    group.sample_size(10);
    for n in SIZES {
        let acvf = model.autocovariances(n - 1).unwrap();
        let data = DMatrix::from_fn(n, 4, |i, j| ((i * (j + 1)) % 17) as f64);
        group.bench_with_input(BenchmarkId::new("levinson_whiten", n), &n, |b, _| {
            b.iter(|| toeplitz_whiten(black_box(&acvf), &data).unwrap())
        });
        let op = ToeplitzMatvec::new(&acvf);
        let x: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
        group.bench_with_input(BenchmarkId::new("fft_matvec", n), &n, |b, _| b.iter(|| op.apply(black_box(&x))));
    }
    group.finish();
}

criterion_group!(benches, modwt, theoretical_wv, estimators, toeplitz);
criterion_main!(benches);
