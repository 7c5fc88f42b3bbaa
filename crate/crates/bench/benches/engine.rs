use std::hint::black_box;

use chiral_bench::{casimir, power};
use chiral_core::algebra::presets;
use chiral_core::borcherds::check_borcherds;
use chiral_core::{wick_left, wick_right, Engine, NormalForm, Window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn residue_products(c: &mut Criterion) {
    let vir = presets::virasoro();
    let t = NormalForm::generator(0);
    let mut group = c.benchmark_group("rp/virasoro");
    for n in 2..=4 {
        let word = power(&vir, "T", n);
        group.bench_with_input(BenchmarkId::new("T_(1) T^n", n), &word, |b, word| {
            b.iter(|| {
                let engine = Engine::new(&vir);
                engine.residue_product(black_box(&t), 1, black_box(word)).unwrap()
            })
        });
    }
    group.finish();
}

fn normal_ordering(c: &mut Criterion) {
    let vir = presets::virasoro();
    let t = NormalForm::generator(0);
    let dt = {
        let engine = Engine::new(&vir);
        engine.derivative(&t, 2).unwrap()
    };
    let tt = power(&vir, "T", 2);
    c.bench_function("nop/virasoro/(d^(2) T) :T T:", |b| {
        b.iter(|| {
            let engine = Engine::new(&vir);
            engine.nop(black_box(&dt), black_box(&tt)).unwrap()
        })
    });
    c.bench_function("nop/virasoro/:(TT) T:", |b| {
        b.iter(|| {
            let engine = Engine::new(&vir);
            engine.nop(black_box(&tt), black_box(&t)).unwrap()
        })
    });
}

fn wick(c: &mut Criterion) {
    let vir = presets::virasoro();
    let t = NormalForm::generator(0);
    c.bench_function("wick-left/virasoro/T :T T:", |b| {
        b.iter(|| wick_left(&Engine::new(&vir), &t, &t, &t).unwrap())
    });
    c.bench_function("wick-right/virasoro/:T T: T", |b| {
        b.iter(|| wick_right(&Engine::new(&vir), &t, &t, &t).unwrap())
    });

    let su2 = presets::su2();
    let s = casimir(&su2);
    let j1 = NormalForm::generator(0);
    c.bench_function("ope/su2/sugawara J^1", |b| {
        b.iter(|| Engine::new(&su2).contraction(black_box(&s), black_box(&j1)).unwrap())
    });
    c.bench_function("ope/su2/sugawara sugawara", |b| {
        b.iter(|| Engine::new(&su2).contraction(black_box(&s), black_box(&s)).unwrap())
    });
}

fn borcherds(c: &mut Criterion) {
    let vir = presets::virasoro();
    let t = NormalForm::generator(0);
    let window = Window::cube(0..=3);
    c.bench_function("borcherds/virasoro/T T T window 0..3", |b| {
        b.iter(|| {
            let report = check_borcherds(&Engine::new(&vir), &t, &t, &t, &window).unwrap();
            assert!(report.is_clean());
        })
    });
    let su2 = presets::su2();
    c.bench_function("consistency/su2/cutoff 2", |b| {
        b.iter(|| assert!(su2.check_consistency(2).unwrap().is_consistent()))
    });
}

criterion_group!(benches, residue_products, normal_ordering, wick, borcherds);
criterion_main!(benches);
