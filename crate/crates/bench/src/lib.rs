//! Fixtures shared by the criterion benches in `benches/`.

use chiral_core::{Algebra, Engine, NormalForm, Scalar};

/// `sum_a :J^a J^a:` in a current algebra.
pub fn casimir(alg: &Algebra) -> NormalForm {
    let engine = Engine::new(alg);
    let dim = alg.generators().len();
    let mut out = NormalForm::zero();
    for a in 0..dim {
        let j = NormalForm::generator(a);
        let jj = engine.nop(&j, &j).expect("quadratic word");
        out.add_scaled(&Scalar::one(), &jj);
    }
    out
}

/// The right-nested word `:T :T ... T::` with `n` letters.
pub fn power(alg: &Algebra, gen: &str, n: usize) -> NormalForm {
    let engine = Engine::new(alg);
    let g = NormalForm::generator(alg.generator_id(gen).expect("generator"));
    let mut acc = g.clone();
    for _ in 1..n {
        acc = engine.nop(&g, &acc).expect("word");
    }
    acc
}

/// Rational functions in one parameter with growing numerator and denominator.
pub fn rational_ladder(alg: &Algebra, param: &str, len: usize) -> Vec<Scalar> {
    let c = alg.param(param).expect("parameter");
    (1..=len as i64)
        .map(|n| {
            let num = &(&c * &c) + &Scalar::from_int(n);
            let den = &c - &Scalar::from_ratio(1, n + 1);
            num.checked_div(&den).expect("nonzero")
        })
        .collect()
}
