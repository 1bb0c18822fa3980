use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use lhlab_bench::{grid, radial};
use lhlab_core::herz::{hl_norm, HerzParams};
use lhlab_core::interp::kfunc::k_functional;
use lhlab_core::interp::{CoupleSpec, WeightedSeq};
use lhlab_core::operators::{hilbert_transform, maximal_operator};

fn operators(c: &mut Criterion) {
    let f = grid(4096);
    c.bench_function("maximal_4096", |b| b.iter(|| maximal_operator(black_box(&f))));
    c.bench_function("hilbert_4096", |b| b.iter(|| hilbert_transform(black_box(&f))));
}

fn norms(c: &mut Criterion) {
    let f = radial(3, 64);
    let params = HerzParams::new(0.25, 2.0, 2.0, 1.5).unwrap();
    c.bench_function("hl_norm_64_shells", |b| b.iter(|| hl_norm(black_box(&f), params, false).unwrap()));
}

fn k(c: &mut Criterion) {
    let y = WeightedSeq::new((-1..15i32).map(|u| (u, 1.0 + u.rem_euclid(3) as f64))).unwrap();
    let couple = CoupleSpec::sequence(-0.5, 2.0, 0.75, f64::INFINITY).unwrap();
    c.bench_function("k_functional_16", |b| b.iter(|| k_functional(black_box(1.7), &y, &couple).unwrap()));
}

criterion_group!(benches, operators, norms, k);
criterion_main!(benches);
