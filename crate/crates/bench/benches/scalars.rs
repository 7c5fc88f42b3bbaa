use std::hint::black_box;

use chiral_bench::rational_ladder;
use chiral_core::algebra::presets;
use chiral_core::Scalar;
use criterion::{criterion_group, criterion_main, Criterion};

fn rational_functions(c: &mut Criterion) {
    let vir = presets::virasoro();
    let ladder = rational_ladder(&vir, "c", 8);
    c.bench_function("scalar/sum of 8 rational functions", |b| {
        b.iter(|| {
            ladder
                .iter()
                .fold(Scalar::zero(), |acc, x| &acc + black_box(x))
        })
    });
    c.bench_function("scalar/product of 8 rational functions", |b| {
        b.iter(|| {
            ladder
                .iter()
                .fold(Scalar::one(), |acc, x| &acc * black_box(x))
        })
    });
    let x = &ladder[3];
    c.bench_function("scalar/render", |b| b.iter(|| black_box(x).render(vir.params())));
    c.bench_function("scalar/parse", |b| {
        b.iter(|| Scalar::parse(black_box("(c^2 + 3)/(c - 1/4) + 2*i*c"), vir.params()).unwrap())
    });
}

criterion_group!(benches, rational_functions);
criterion_main!(benches);
