//! Microbenchmarks: the offset kernel, the closed-form models, and the DP
//! oracle at desk scale.

use criterion::{criterion_group, criterion_main, Criterion};
use sphq_core::geometry::{Latitude, LatitudeKernel};
use sphq_core::models::{quantize_equator, quantize_one_circle, quantize_two_circles};
use sphq_core::oracle::dp_optimal;
use sphq_core::GridSpec;
use std::hint::black_box;

fn lat(v: f64) -> Latitude {
    Latitude::new(v).unwrap()
}

fn bench_sigma_kernel(c: &mut Criterion) {
    let kernel = LatitudeKernel::new(lat(0.6));
    let offsets: Vec<f64> = (0..1024)
        .map(|i| -3.0 + 6.0 * i as f64 / 1023.0)
        .collect();
    c.bench_function("sigma_kernel_1024_offsets", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &dt in &offsets {
                acc += kernel.sigma_sq(black_box(dt));
            }
            acc
        })
    });
}

fn bench_models(c: &mut Criterion) {
    c.bench_function("quantize_equator_120_6", |b| {
        b.iter(|| quantize_equator(black_box(120), black_box(6)).unwrap().error)
    });
    c.bench_function("quantize_one_circle_120_6", |b| {
        b.iter(|| {
            quantize_one_circle(black_box(120), black_box(6), lat(0.6))
                .unwrap()
                .error
        })
    });
    c.bench_function("quantize_two_circles_120_8", |b| {
        b.iter(|| {
            quantize_two_circles(black_box(120), black_box(8), lat(0.6))
                .unwrap()
                .error
        })
    });
}

fn bench_dp_oracle(c: &mut Criterion) {
    let points = GridSpec::new(24).unwrap().longitudes();
    c.bench_function("dp_optimal_24_4", |b| {
        b.iter(|| dp_optimal(black_box(&points), lat(0.6), 4).unwrap().error)
    });
}

criterion_group!(benches, bench_sigma_kernel, bench_models, bench_dp_oracle);
criterion_main!(benches);
