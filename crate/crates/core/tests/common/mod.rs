#![allow(dead_code)]

use chiral_core::algebra::presets;
use chiral_core::expr::{deriv, nop};
use chiral_core::{Algebra, Engine, FieldExpr, Letter, NormalForm, Scalar};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Right-nested `:l1 (l2 (... lk)):` of derived generators.
pub fn word_expr(letters: &[Letter]) -> FieldExpr {
    let mut it = letters.iter().rev();
    let last = it.next().expect("nonempty word");
    let mut acc = deriv(last.deriv, FieldExpr::Generator(last.gen));
    for l in it {
        acc = nop(deriv(l.deriv, FieldExpr::Generator(l.gen)), acc);
    }
    acc
}

pub fn weight(alg: &Algebra, letters: &[Letter]) -> i64 {
    letters
        .iter()
        .map(|l| alg.weight_of(l.gen) as i64 + l.deriv as i64)
        .sum()
}

/// Words of derived generators with total weight at most `max_weight`.
pub fn word_strategy(ngen: usize, max_weight: i64, alg: Algebra) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..ngen, 0u32..3), 1..=3)
        .prop_map(|v| v.into_iter().map(|(g, d)| Letter::new(g, d)).collect::<Vec<_>>())
        .prop_filter("weight bound", move |w| weight(&alg, w) <= max_weight)
}

/// A random homogeneous field: the weight is uniform over the attainable
/// values up to `max_weight`, and the field is a combination of one or two
/// random words of exactly that weight.
pub fn random_field(alg: &Algebra, engine: &Engine, rng: &mut impl Rng, max_weight: i64) -> NormalForm {
    let lightest = (0..alg.generators().len())
        .map(|g| alg.weight_of(g) as i64)
        .min()
        .expect("at least one generator");
    loop {
        let target = rng.gen_range(lightest..=max_weight);
        let mut out = NormalForm::zero();
        for _ in 0..rng.gen_range(1..=2) {
            let w = random_word_of_weight(alg, rng, target);
            let nf = engine.normalize(&word_expr(&w)).expect("normalize");
            let c = *[-3, -2, -1, 1, 2, 3].choose(rng).expect("nonempty");
            out.add_scaled(&Scalar::from_int(c), &nf);
        }
        if !out.is_zero() {
            return out;
        }
    }
}

/// A random word of derived generators with total weight `target`.
pub fn random_word_of_weight(alg: &Algebra, rng: &mut impl Rng, target: i64) -> Vec<Letter> {
    let ngen = alg.generators().len();
    'restart: loop {
        let mut word = Vec::new();
        let mut rem = target;
        while rem > 0 {
            let fits: Vec<usize> = (0..ngen).filter(|&g| alg.weight_of(g) as i64 <= rem).collect();
            let Some(&g) = fits.choose(rng) else {
                continue 'restart;
            };
            let d = rng.gen_range(0..=rem - alg.weight_of(g) as i64);
            word.push(Letter::new(g, d as u32));
            rem -= alg.weight_of(g) as i64 + d;
        }
        return word;
    }
}

pub fn virasoro() -> Algebra {
    presets::virasoro()
}

pub fn su2() -> Algebra {
    presets::su2()
}

pub fn t() -> NormalForm {
    NormalForm::generator(0)
}

pub fn dt() -> NormalForm {
    NormalForm::letter(Letter::new(0, 1))
}

pub fn j(a: usize) -> NormalForm {
    NormalForm::generator(a)
}

pub fn dj(a: usize) -> NormalForm {
    NormalForm::letter(Letter::new(a, 1))
}
