use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pud_bench::benchmark_image;
use pud_core::{extract_hsv_histogram, extract_pud, PudParams};

fn bench_extraction(c: &mut Criterion) {
    let img = benchmark_image();
    let params = PudParams::default();

    c.bench_function("extract_pud_384x256", |b| {
        b.iter(|| extract_pud(black_box(&img), black_box(&params)))
    });

    c.bench_function("extract_hsv_histogram_384x256", |b| {
        b.iter(|| extract_hsv_histogram(black_box(&img)))
    });
}

criterion_group!(benches, bench_extraction);
criterion_main!(benches);
