//! The Borcherds identity
//!
//! ```text
//! sum_i C(p, i) (A_(r+i) B)_(p+q-i) C
//!   = sum_i (-1)^i C(r, i) [ A_(p+r-i) (B_(q+i) C) - (-1)^r B_(q+r-i) (A_(p+i) C) ]
//! ```
//!
//! as an independent check on the engine. Every sum is finite because a
//! residue product `X_(n) Y` vanishes once `n > wt X + wt Y - 1`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::engine::{binom_scalar, Engine, EngineError};
use crate::expr::NormalForm;
use crate::scalar::Scalar;

/// Both sides of one instance of the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct BorcherdsSides {
    pub lhs: NormalForm,
    pub rhs: NormalForm,
}

impl BorcherdsSides {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Which part of the integer lattice an instance belongs to.
///
/// With `p, r >= 0` both binomial sums are finite by themselves; elsewhere
/// termination relies on weight truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    NonNegative,
    General,
}

impl Tier {
    pub fn of(p: i64, r: i64) -> Tier {
        if p >= 0 && r >= 0 {
            Tier::NonNegative
        } else {
            Tier::General
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BorcherdsViolation {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub lhs: NormalForm,
    pub rhs: NormalForm,
    pub tier: Tier,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BorcherdsReport {
    pub checked: usize,
    pub violations: Vec<BorcherdsViolation>,
}

impl BorcherdsReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Box of `(p, q, r)` values to check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub p: RangeInclusive<i64>,
    pub q: RangeInclusive<i64>,
    pub r: RangeInclusive<i64>,
}

impl Window {
    pub fn new(p: RangeInclusive<i64>, q: RangeInclusive<i64>, r: RangeInclusive<i64>) -> Self {
        Window { p, q, r }
    }

    pub fn cube(range: RangeInclusive<i64>) -> Self {
        Window::new(range.clone(), range.clone(), range)
    }

    pub fn len(&self) -> usize {
        let n = |r: &RangeInclusive<i64>| (r.end() - r.start() + 1).max(0) as usize;
        n(&self.p) * n(&self.q) * n(&self.r)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn sign(e: i64) -> Scalar {
    if e.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        Scalar::from_int(-1)
    }
}

/// Evaluate both sides of the identity for one `(p, q, r)`.
pub fn borcherds_sides(
    engine: &Engine,
    a: &NormalForm,
    b: &NormalForm,
    c: &NormalForm,
    p: i64,
    q: i64,
    r: i64,
) -> Result<BorcherdsSides, EngineError> {
    let alg = engine.algebra();
    let (Some(wa), Some(wb), Some(wc)) = (a.max_weight(alg), b.max_weight(alg), c.max_weight(alg))
    else {
        return Ok(BorcherdsSides {
            lhs: NormalForm::zero(),
            rhs: NormalForm::zero(),
        });
    };

    let mut lhs = NormalForm::zero();
    for i in 0..=(wa + wb - 1 - r).max(-1) {
        let k = binom_scalar(p, i);
        if k.is_zero() {
            continue;
        }
        let ab = engine.residue_product(a, r + i, b)?;
        if ab.is_zero() {
            continue;
        }
        lhs.add_scaled(&k, &engine.residue_product(&ab, p + q - i, c)?);
    }

    let mut rhs = NormalForm::zero();
    for i in 0..=(wb + wc - 1 - q).max(-1) {
        let k = binom_scalar(r, i);
        if k.is_zero() {
            continue;
        }
        let bc = engine.residue_product(b, q + i, c)?;
        if bc.is_zero() {
            continue;
        }
        let t = engine.residue_product(a, p + r - i, &bc)?;
        rhs.add_scaled(&(&k * &sign(i)), &t);
    }
    for i in 0..=(wa + wc - 1 - p).max(-1) {
        let k = binom_scalar(r, i);
        if k.is_zero() {
            continue;
        }
        let ac = engine.residue_product(a, p + i, c)?;
        if ac.is_zero() {
            continue;
        }
        let t = engine.residue_product(b, q + r - i, &ac)?;
        rhs.add_scaled(&-(&k * &sign(i + r)), &t);
    }
    Ok(BorcherdsSides { lhs, rhs })
}

/// Check every `(p, q, r)` in the window and collect the failures.
pub fn check_borcherds(
    engine: &Engine,
    a: &NormalForm,
    b: &NormalForm,
    c: &NormalForm,
    window: &Window,
) -> Result<BorcherdsReport, EngineError> {
    let mut report = BorcherdsReport::default();
    for p in window.p.clone() {
        for q in window.q.clone() {
            for r in window.r.clone() {
                let sides = borcherds_sides(engine, a, b, c, p, q, r)?;
                report.checked += 1;
                if !sides.holds() {
                    report.violations.push(BorcherdsViolation {
                        p,
                        q,
                        r,
                        lhs: sides.lhs,
                        rhs: sides.rhs,
                        tier: Tier::of(p, r),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{presets, Algebra, GeneratorDecl, OpeEntry};
    use crate::expr::{Letter, Monomial};

    fn t() -> NormalForm {
        NormalForm::generator(0)
    }

    #[test]
    fn base_instance_holds() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        // (T_(0)T)_(0)T = (dT)_(0)T = 0
        let s = borcherds_sides(&e, &t(), &t(), &t(), 0, 0, 0).unwrap();
        assert!(s.holds());
        assert!(s.lhs.is_zero());
        // (T_(0)T)_(1)T + (T_(1)T)_(0)T = -dT + 2 dT
        let s = borcherds_sides(&e, &t(), &t(), &t(), 1, 0, 0).unwrap();
        assert!(s.holds());
        assert_eq!(s.lhs, NormalForm::letter(Letter::new(0, 1)));
    }

    #[test]
    fn product_rule_instance() {
        // p = 2, q = -1, r = 0: T_(2)(T_(-1)T)
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let s = borcherds_sides(&e, &t(), &t(), &t(), 2, -1, 0).unwrap();
        assert!(s.holds());
        let tt = e.nop(&t(), &t()).unwrap();
        assert_eq!(s.rhs, e.residue_product(&t(), 2, &tt).unwrap());
    }

    #[test]
    fn normal_ordered_left_instance() {
        // p = 0, r = -1: (T_(-1)T)_(q) T
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let tt = e.nop(&t(), &t()).unwrap();
        for q in -2..=5 {
            let s = borcherds_sides(&e, &t(), &t(), &t(), 0, q, -1).unwrap();
            assert!(s.holds(), "q = {q}");
            assert_eq!(s.lhs, e.residue_product(&tt, q, &t()).unwrap());
        }
    }

    #[test]
    fn virasoro_window_is_clean() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let rep = check_borcherds(&e, &t(), &t(), &t(), &Window::cube(-2..=3)).unwrap();
        assert_eq!(rep.checked, 216);
        assert!(rep.is_clean(), "{:?}", rep.violations.first());
    }

    #[test]
    fn su2_window_is_clean() {
        let su2 = presets::su2();
        let e = Engine::new(&su2);
        let j = |g| NormalForm::generator(g);
        let rep = check_borcherds(&e, &j(0), &j(1), &j(2), &Window::cube(-2..=2)).unwrap();
        assert_eq!(rep.checked, 125);
        assert!(rep.is_clean());
    }

    #[test]
    fn skew_symmetry_is_a_special_case() {
        // p = -1, q = 0, C = I turns the identity into skew symmetry in r.
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let dt = NormalForm::letter(Letter::new(0, 1));
        let tt = e.nop(&t(), &t()).unwrap();
        for m in -3..=3 {
            for (a, b) in [(t(), t()), (t(), dt.clone()), (tt.clone(), t())] {
                let s = borcherds_sides(&e, &a, &b, &NormalForm::identity(), -1, 0, m).unwrap();
                assert!(s.holds(), "m = {m}");
            }
        }
    }

    #[test]
    fn corrupted_table_is_reported() {
        // T_(1)T = 3T breaks the conformal weight of T.
        let c = Scalar::param(0);
        let alg = Algebra::define(
            vec!["c".into()],
            vec![GeneratorDecl::new("T", 2)],
            vec![
                OpeEntry::new(
                    "T",
                    "T",
                    3,
                    NormalForm::term(&c * &Scalar::from_ratio(1, 2), Monomial::identity()),
                ),
                OpeEntry::new("T", "T", 1, NormalForm::generator(0).scale(&Scalar::from_int(3))),
                OpeEntry::new("T", "T", 0, NormalForm::letter(Letter::new(0, 1))),
            ],
        )
        .unwrap();
        let e = Engine::new(&alg);
        let rep = check_borcherds(&e, &t(), &t(), &t(), &Window::cube(0..=2)).unwrap();
        assert!(!rep.is_clean());
        assert!(rep.violations.iter().all(|v| v.tier == Tier::NonNegative));
    }
}
