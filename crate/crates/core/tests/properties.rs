mod common;

use chiral_core::borcherds::borcherds_sides;
use chiral_core::{Algebra, Engine, GaussRat, NormalForm, ParamSpace, Scalar, Weight};
use common::*;
use proptest::prelude::*;

fn field(e: &Engine, w: &[chiral_core::Letter]) -> NormalForm {
    e.normalize(&word_expr(w)).unwrap()
}

fn algebras() -> impl Strategy<Value = Algebra> {
    prop_oneof![Just(virasoro()), Just(su2())]
}

fn pair() -> impl Strategy<Value = (Algebra, Vec<chiral_core::Letter>, Vec<chiral_core::Letter>)> {
    algebras().prop_flat_map(|alg| {
        let n = alg.generators().len();
        let s1 = word_strategy(n, 6, alg.clone());
        let s2 = word_strategy(n, 6, alg.clone());
        (Just(alg), s1, s2)
    })
}

fn triple() -> impl Strategy<
    Value = (
        Algebra,
        Vec<chiral_core::Letter>,
        Vec<chiral_core::Letter>,
        Vec<chiral_core::Letter>,
    ),
> {
    algebras().prop_flat_map(|alg| {
        let n = alg.generators().len();
        let s = || word_strategy(n, 4, alg.clone());
        (Just(alg.clone()), s(), s(), s())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identity_laws((alg, w, _) in pair(), m in 0i64..4) {
        let e = Engine::new(&alg);
        let a = field(&e, &w);
        let i = NormalForm::identity();
        prop_assert!(e.residue_product(&a, m, &i).unwrap().is_zero());
        prop_assert_eq!(e.residue_product(&a, -m - 1, &i).unwrap(), e.derivative(&a, m as u32).unwrap());
        prop_assert_eq!(e.residue_product(&i, -1, &a).unwrap(), a.clone());
        prop_assert!(e.residue_product(&i, m, &a).unwrap().is_zero());
    }

    #[test]
    fn derivative_shift_and_leibniz((alg, w1, w2) in pair(), n in -3i64..5) {
        let e = Engine::new(&alg);
        let a = field(&e, &w1);
        let b = field(&e, &w2);
        let da = e.derivative(&a, 1).unwrap();
        let db = e.derivative(&b, 1).unwrap();
        // (da)_(n) b = -n a_(n-1) b
        let lhs = e.residue_product(&da, n, &b).unwrap();
        let rhs = e.residue_product(&a, n - 1, &b).unwrap().scale(&Scalar::from_int(-n));
        prop_assert_eq!(lhs.clone(), rhs);
        // d(a_(n) b) = (da)_(n) b + a_(n)(db)
        let d = e.derivative(&e.residue_product(&a, n, &b).unwrap(), 1).unwrap();
        prop_assert_eq!(d, lhs.add(&e.residue_product(&a, n, &db).unwrap()));
    }

    #[test]
    fn divided_powers_compose((alg, w, _) in pair(), i in 0u32..3, j in 0u32..3) {
        // d^(i) d^(j) = C(i+j, i) d^(i+j)
        let e = Engine::new(&alg);
        let a = field(&e, &w);
        let lhs = e.derivative(&e.derivative(&a, j).unwrap(), i).unwrap();
        let c = chiral_core::engine::binomial((i + j) as i64, i as i64);
        let rhs = e.derivative(&a, i + j).unwrap().scale(&Scalar::from_bigint(c));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn weight_is_conserved((alg, w1, w2) in pair(), n in -3i64..6) {
        let e = Engine::new(&alg);
        let a = field(&e, &w1);
        let b = field(&e, &w2);
        let r = e.residue_product(&a, n, &b).unwrap();
        let expect = weight(&alg, &w1) + weight(&alg, &w2) - n - 1;
        match r.weight(&alg) {
            Weight::Zero => {}
            Weight::Of(k) => prop_assert_eq!(k, expect),
            Weight::Inhomogeneous => prop_assert!(false, "inhomogeneous result"),
        }
    }

    #[test]
    fn quasi_associativity((alg, w1, w2, w3) in triple(), q in -2i64..5) {
        let e = Engine::new(&alg);
        let (a, b, c) = (field(&e, &w1), field(&e, &w2), field(&e, &w3));
        let s = borcherds_sides(&e, &a, &b, &c, 0, q, -1).unwrap();
        prop_assert_eq!(&s.lhs, &s.rhs);
        prop_assert_eq!(s.lhs, e.residue_product(&e.nop(&a, &b).unwrap(), q, &c).unwrap());
    }

    #[test]
    fn skew_symmetry((alg, w1, w2) in pair(), m in -3i64..5) {
        let e = Engine::new(&alg);
        let a = field(&e, &w1);
        let b = field(&e, &w2);
        prop_assert_eq!(e.residue_product(&b, m, &a).unwrap(), e.skew(&b, m, &a).unwrap());
    }

    #[test]
    fn normal_forms_are_canonical((alg, w, _) in pair()) {
        // renormalizing the expression of a normal form is a fixed point
        let e = Engine::new(&alg);
        let a = field(&e, &w);
        prop_assert_eq!(e.normalize(&a.to_expr()).unwrap(), a);
    }
}

fn scalar_strategy() -> impl Strategy<Value = Scalar> {
    let atom = prop_oneof![
        (-5i64..6, 1i64..4).prop_map(|(n, d)| Scalar::from_ratio(n, d)),
        Just(Scalar::param(0)),
        Just(Scalar::param(1)),
        Just(Scalar::i()),
    ];
    prop::collection::vec((atom.clone(), atom), 1..4).prop_map(|terms| {
        terms
            .into_iter()
            .fold(Scalar::zero(), |acc, (x, y)| &acc + &(&x * &y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scalar_field_axioms(x in scalar_strategy(), y in scalar_strategy(), z in scalar_strategy()) {
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !y.is_zero() {
            let q = x.checked_div(&y).unwrap();
            prop_assert_eq!(&q * &y, x.clone());
        }
    }

    #[test]
    fn scalar_render_parse_roundtrip(x in scalar_strategy(), y in scalar_strategy()) {
        let space = ParamSpace::new(["c", "k"]);
        let v = if y.is_zero() { x } else { x.checked_div(&y).unwrap() };
        let text = v.render(&space);
        prop_assert_eq!(Scalar::parse(&text, &space).unwrap(), v);
    }

    #[test]
    fn evaluation_is_a_homomorphism(x in scalar_strategy(), y in scalar_strategy(), c in -4i64..5, k in 1i64..5) {
        let space = ParamSpace::new(["c", "k"]);
        let b = space.bind([("c", GaussRat::from_int(c)), ("k", GaussRat::from_ratio(k, 3))]).unwrap();
        let ex = x.eval(&space, &b).unwrap();
        let ey = y.eval(&space, &b).unwrap();
        prop_assert_eq!((&x * &y).eval(&space, &b).unwrap(), &ex * &ey);
        prop_assert_eq!((&x + &y).eval(&space, &b).unwrap(), &ex + &ey);
    }
}
