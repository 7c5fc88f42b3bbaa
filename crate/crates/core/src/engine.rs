//! Rewriting of field expressions to normal form and the residue-product
//! calculus on normal forms.
//!
//! Every product `x_(n) y` of standard monomials is reduced by one of these
//! rules, tried in order:
//!
//! 1. identity laws: `I_(n) y = delta_(n,-1) y`, `x_(n) I = 0` for `n >= 0`
//!    and `x_(-j-1) I = d^(j) x`;
//! 2. derivative extraction: `(d^(j) a)_(n) y = (-1)^j C(n, j) a_(n-j) y`;
//! 3. a composite left factor `(x1_(-1) X)_(n) y` expands as
//!    `sum_i x1_(-1-i) (X_(n+i) y) + X_(n-1-i) (x1_(i) y)`;
//! 4. a generator against a composite right factor, `n >= 0`:
//!    `G_(n) (y1_(-1) Y) = y1_(-1) (G_(n) Y) + sum_i C(n, i) (G_(i) y1)_(n-1-i) Y`;
//! 5. a generator against a derived generator, `n >= 0`, through the table and
//!    `a_(n) d^(j) b = sum_i C(n, i) d^(j-i) (a_(n-i) b)`;
//! 6. `G_(-j-1) y = :d^(j) G y:`, inserted into the ordered word; an
//!    out-of-order pair is swapped with
//!    `x_(-1)(y1_(-1) Y) = y1_(-1)(x_(-1) Y) + sum_i (-1)^i (x_(i) y1)_(-2-i) Y`.
//!
//! Infinite sums are cut off by weight: a product of weight below zero
//! vanishes, so `a_(i) b = 0` once `i > wt(a) + wt(b) - 1`.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::expr::{FieldExpr, Letter, Monomial, NormalForm};
use crate::scalar::Scalar;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(
        "rewrite step budget of {budget} exceeded; the OPE table may be inconsistent or not weight graded"
    )]
    BudgetExceeded { budget: u64 },
}

type Result<T> = std::result::Result<T, EngineError>;

/// Generalized binomial coefficient `C(n, k)` for any integer `n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for t in 0..k {
        acc *= BigInt::from(n - t);
        acc /= BigInt::from(t + 1);
    }
    acc
}

pub(crate) fn binom_scalar(n: i64, k: i64) -> Scalar {
    Scalar::from_bigint(binomial(n, k))
}

fn sign(e: i64) -> Scalar {
    if e.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        Scalar::from_int(-1)
    }
}

/// Memoizing rewriting engine bound to one algebra.
///
/// Caches are per instance and not shared between threads; create one
/// engine per worker.
pub struct Engine<'a> {
    alg: &'a Algebra,
    budget: u64,
    steps: Cell<u64>,
    depth: Cell<u32>,
    products: RefCell<HashMap<(Monomial, i64, Monomial), NormalForm>>,
    inserts: RefCell<HashMap<(Letter, Monomial), NormalForm>>,
    derivatives: RefCell<HashMap<(Monomial, u32), NormalForm>>,
    cached_terms: Cell<usize>,
}

/// Results longer than this are recomputed rather than cached.
const CACHE_ENTRY_LIMIT: usize = 1024;
/// Total cached terms before every cache is flushed.
const CACHE_TERM_LIMIT: usize = 2_000_000;

struct CallGuard<'e> {
    depth: &'e Cell<u32>,
}

impl Drop for CallGuard<'_> {
    fn drop(&mut self) {
        self.depth.set(self.depth.get() - 1);
    }
}

impl<'a> Engine<'a> {
    pub fn new(alg: &'a Algebra) -> Self {
        Engine::with_budget(alg, DEFAULT_STEP_BUDGET)
    }

    /// `budget` bounds the number of uncached rewrite steps per top-level call.
    pub fn with_budget(alg: &'a Algebra, budget: u64) -> Self {
        Engine {
            alg,
            budget,
            steps: Cell::new(0),
            depth: Cell::new(0),
            products: RefCell::new(HashMap::new()),
            inserts: RefCell::new(HashMap::new()),
            derivatives: RefCell::new(HashMap::new()),
            cached_terms: Cell::new(0),
        }
    }

    pub fn algebra(&self) -> &'a Algebra {
        self.alg
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn enter(&self) -> CallGuard<'_> {
        if self.depth.get() == 0 {
            self.steps.set(0);
        }
        self.depth.set(self.depth.get() + 1);
        CallGuard { depth: &self.depth }
    }

    /// Whether a result of `len` terms should be cached, flushing the caches
    /// first when they are full.
    fn admit(&self, len: usize) -> bool {
        if len > CACHE_ENTRY_LIMIT {
            return false;
        }
        let total = self.cached_terms.get() + len + 1;
        if total > CACHE_TERM_LIMIT {
            self.products.borrow_mut().clear();
            self.inserts.borrow_mut().clear();
            self.derivatives.borrow_mut().clear();
            self.cached_terms.set(len + 1);
        } else {
            self.cached_terms.set(total);
        }
        true
    }

    fn tick(&self) -> Result<()> {
        let s = self.steps.get() + 1;
        self.steps.set(s);
        if s > self.budget {
            Err(EngineError::BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn letter_weight(&self, l: Letter) -> i64 {
        self.alg.weight_of(l.gen) as i64 + l.deriv as i64
    }

    fn weight(&self, m: &Monomial) -> i64 {
        m.weight(self.alg)
    }

    /// Largest `i` for which `a_(i) b` can be nonzero.
    fn pole_bound(&self, a: &NormalForm, b: &NormalForm) -> Option<i64> {
        Some(a.max_weight(self.alg)? + b.max_weight(self.alg)? - 1)
    }

    // ---- public operations -------------------------------------------------

    /// Rewrite an expression to its normal form.
    pub fn normalize(&self, e: &FieldExpr) -> Result<NormalForm> {
        let _g = self.enter();
        self.normalize_inner(e)
    }

    fn normalize_inner(&self, e: &FieldExpr) -> Result<NormalForm> {
        Ok(match e {
            FieldExpr::Identity => NormalForm::identity(),
            FieldExpr::Generator(g) => NormalForm::generator(*g),
            FieldExpr::Derivative(j, inner) => {
                let nf = self.normalize_inner(inner)?;
                self.derivative_inner(&nf, *j)?
            }
            FieldExpr::Product(m, a, b) => {
                let a = self.normalize_inner(a)?;
                let b = self.normalize_inner(b)?;
                self.rp(&a, *m, &b)?
            }
            FieldExpr::Sum(terms) => {
                let mut out = NormalForm::zero();
                for (c, t) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    out.add_scaled(c, &self.normalize_inner(t)?);
                }
                out
            }
        })
    }

    /// `a_(m) b` for arbitrary normal forms and any integer `m`.
    pub fn residue_product(&self, a: &NormalForm, m: i64, b: &NormalForm) -> Result<NormalForm> {
        let _g = self.enter();
        self.rp(a, m, b)
    }

    /// Normally ordered product `:a b:`.
    pub fn nop(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
        self.residue_product(a, -1, b)
    }

    /// Divided-power derivative `d^(j) a`.
    pub fn derivative(&self, a: &NormalForm, j: u32) -> Result<NormalForm> {
        let _g = self.enter();
        self.derivative_inner(a, j)
    }

    /// Nonzero `(i, a_(i) b)` for `i >= 0`, ascending in `i`.
    pub fn contraction(&self, a: &NormalForm, b: &NormalForm) -> Result<Vec<(u32, NormalForm)>> {
        let _g = self.enter();
        let mut out = Vec::new();
        let Some(top) = self.pole_bound(a, b) else {
            return Ok(out);
        };
        for i in 0..=top {
            let v = self.rp(a, i, b)?;
            if !v.is_zero() {
                out.push((i as u32, v));
            }
        }
        Ok(out)
    }

    /// One plus the largest `i >= 0` with `a_(i) b != 0`; zero if none.
    pub fn locality_order(&self, a: &NormalForm, b: &NormalForm) -> Result<u32> {
        Ok(self
            .contraction(a, b)?
            .last()
            .map_or(0, |(i, _)| i + 1))
    }

    /// Right-hand side of skew symmetry:
    /// `sum_(i >= 0) (-1)^(m+i+1) d^(i) (a_(m+i) b)`, which equals `b_(m) a`.
    pub fn skew(&self, b: &NormalForm, m: i64, a: &NormalForm) -> Result<NormalForm> {
        let _g = self.enter();
        let mut out = NormalForm::zero();
        let Some(top) = self.pole_bound(a, b) else {
            return Ok(out);
        };
        for i in 0..=(top - m).max(-1) {
            let inner = self.rp(a, m + i, b)?;
            if inner.is_zero() {
                continue;
            }
            let d = self.derivative_inner(&inner, i as u32)?;
            out.add_scaled(&sign(m + i + 1), &d);
        }
        Ok(out)
    }

    // ---- bilinear extension ------------------------------------------------

    pub(crate) fn rp(&self, a: &NormalForm, n: i64, b: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                let t = self.rp_mono(ma, n, mb)?;
                if !t.is_zero() {
                    out.add_scaled(&(ca * cb), &t);
                }
            }
        }
        Ok(out)
    }

    fn rp_nf_mono(&self, a: &NormalForm, n: i64, y: &Monomial) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (ma, ca) in a.iter() {
            let t = self.rp_mono(ma, n, y)?;
            out.add_scaled(ca, &t);
        }
        Ok(out)
    }

    fn rp_mono_nf(&self, x: &Monomial, n: i64, b: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (mb, cb) in b.iter() {
            let t = self.rp_mono(x, n, mb)?;
            out.add_scaled(cb, &t);
        }
        Ok(out)
    }

    /// `l_(-1) b` for a single letter.
    fn nop_letter_nf(&self, l: Letter, b: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (mb, cb) in b.iter() {
            let t = self.insert(l, mb)?;
            out.add_scaled(cb, &t);
        }
        Ok(out)
    }

    // ---- monomial products -------------------------------------------------

    fn rp_mono(&self, x: &Monomial, n: i64, y: &Monomial) -> Result<NormalForm> {
        if x.is_identity() {
            return Ok(if n == -1 {
                NormalForm::monomial(y.clone())
            } else {
                NormalForm::zero()
            });
        }
        if y.is_identity() {
            return if n >= 0 {
                Ok(NormalForm::zero())
            } else {
                self.derive_mono(x, (-n - 1) as u32)
            };
        }
        if self.weight(x) + self.weight(y) - n - 1 < 0 {
            return Ok(NormalForm::zero());
        }
        let key = (x.clone(), n, y.clone());
        if let Some(hit) = self.products.borrow().get(&key) {
            return Ok(hit.clone());
        }
        self.tick()?;
        let result = if x.len() == 1 {
            let l = x.first().expect("nonempty");
            if l.deriv == 0 {
                self.gen_rp(l.gen, n, y)?
            } else {
                let j = l.deriv as i64;
                let c = binomial(n, j);
                if c.is_zero() {
                    NormalForm::zero()
                } else {
                    let c = &Scalar::from_bigint(c) * &sign(j);
                    self.gen_rp(l.gen, n - j, y)?.scale(&c)
                }
            }
        } else {
            self.composite_left(x, n, y)?
        };
        if self.admit(result.len()) {
            self.products.borrow_mut().insert(key, result.clone());
        }
        Ok(result)
    }

    /// `G_(n) y` for a generator `G` and a non-identity monomial `y`.
    fn gen_rp(&self, g: usize, n: i64, y: &Monomial) -> Result<NormalForm> {
        if n < 0 {
            return self.insert(Letter::new(g, (-n - 1) as u32), y);
        }
        let y1 = y.first().expect("non-identity");
        if y.len() == 1 {
            return self.gen_letter(g, n, y1);
        }
        let rest = y.rest();
        let mut out = self.nop_letter_nf(y1, &self.gen_rp(g, n, &rest)?)?;
        let top = n.min(self.alg.weight_of(g) as i64 + self.letter_weight(y1) - 1);
        for i in 0..=top {
            let inner = self.gen_letter(g, i, y1)?;
            if inner.is_zero() {
                continue;
            }
            let t = self.rp_nf_mono(&inner, n - 1 - i, &rest)?;
            out.add_scaled(&binom_scalar(n, i), &t);
        }
        Ok(out)
    }

    /// `G_(n) d^(j) H` for `n >= 0`, from the table.
    fn gen_letter(&self, g: usize, n: i64, h: Letter) -> Result<NormalForm> {
        debug_assert!(n >= 0);
        let mut out = NormalForm::zero();
        let j = h.deriv as i64;
        for i in 0..=j.min(n) {
            let Some(entry) = self.alg.table().get(g, h.gen, (n - i) as u32) else {
                continue;
            };
            let d = self.derivative_inner(entry, (j - i) as u32)?;
            out.add_scaled(&binom_scalar(n, i), &d);
        }
        Ok(out)
    }

    /// `(x1_(-1) X)_(n) y` by the Borcherds identity at `p = 0, r = -1`.
    fn composite_left(&self, x: &Monomial, n: i64, y: &Monomial) -> Result<NormalForm> {
        let x1 = x.first().expect("composite");
        let xr = x.rest();
        let x1_mono = Monomial::letter(x1);
        let (w1, wr, wy) = (self.letter_weight(x1), self.weight(&xr), self.weight(y));
        let mut out = NormalForm::zero();
        // sum_i x1_(-1-i) (X_(n+i) y)
        for i in 0..=(wr + wy - 1 - n).max(-1) {
            let inner = self.rp_mono(&xr, n + i, y)?;
            if inner.is_zero() {
                continue;
            }
            let shifted = Letter::new(x1.gen, x1.deriv + i as u32);
            let c = binom_scalar(i + x1.deriv as i64, i);
            let t = self.nop_letter_nf(shifted, &inner)?;
            out.add_scaled(&c, &t);
        }
        // sum_i X_(n-1-i) (x1_(i) y)
        for i in 0..=(w1 + wy - 1) {
            let inner = self.rp_mono(&x1_mono, i, y)?;
            if inner.is_zero() {
                continue;
            }
            let t = self.rp_mono_nf(&xr, n - 1 - i, &inner)?;
            out.add_scaled(&Scalar::one(), &t);
        }
        Ok(out)
    }

    /// `x_(-1) y`: insert a letter into an ordered word.
    fn insert(&self, x: Letter, y: &Monomial) -> Result<NormalForm> {
        let Some(y1) = y.first() else {
            return Ok(NormalForm::letter(x));
        };
        if x <= y1 {
            return Ok(NormalForm::monomial(y.prepend(x)));
        }
        let key = (x, y.clone());
        if let Some(hit) = self.inserts.borrow().get(&key) {
            return Ok(hit.clone());
        }
        self.tick()?;
        let rest = y.rest();
        let mut out = self.nop_letter_nf(y1, &self.insert(x, &rest)?)?;
        let (xm, y1m) = (Monomial::letter(x), Monomial::letter(y1));
        for i in 0..=(self.letter_weight(x) + self.letter_weight(y1) - 1) {
            let bracket = self.rp_mono(&xm, i, &y1m)?;
            if bracket.is_zero() {
                continue;
            }
            let t = self.rp_nf_mono(&bracket, -2 - i, &rest)?;
            out.add_scaled(&sign(i), &t);
        }
        if self.admit(out.len()) {
            self.inserts.borrow_mut().insert(key, out.clone());
        }
        Ok(out)
    }

    // ---- derivatives -------------------------------------------------------

    fn derivative_inner(&self, a: &NormalForm, j: u32) -> Result<NormalForm> {
        if j == 0 {
            return Ok(a.clone());
        }
        let mut out = NormalForm::zero();
        for (m, c) in a.iter() {
            let d = self.derive_mono(m, j)?;
            out.add_scaled(c, &d);
        }
        Ok(out)
    }

    /// Leibniz rule in divided powers:
    /// `d^(j)(x1 ... xl) = sum_(s1+..+sl=j) prod C(jk+sk, sk) d^(jk+sk) xk`.
    fn derive_mono(&self, m: &Monomial, j: u32) -> Result<NormalForm> {
        if j == 0 {
            return Ok(NormalForm::monomial(m.clone()));
        }
        if m.is_identity() {
            return Ok(NormalForm::zero());
        }
        if let [l] = m.letters() {
            let c = binom_scalar(l.deriv as i64 + j as i64, j as i64);
            return Ok(NormalForm::term(c, Monomial::letter(Letter::new(l.gen, l.deriv + j))));
        }
        let key = (m.clone(), j);
        if let Some(hit) = self.derivatives.borrow().get(&key) {
            return Ok(hit.clone());
        }
        self.tick()?;
        let letters = m.letters();
        let mut out = NormalForm::zero();
        for split in compositions(letters.len(), j) {
            let mut coeff = Scalar::one();
            let mut word = Vec::with_capacity(letters.len());
            for (l, s) in letters.iter().zip(&split) {
                coeff = &coeff * &binom_scalar(l.deriv as i64 + *s as i64, *s as i64);
                word.push(Letter::new(l.gen, l.deriv + s));
            }
            let t = self.word_nf(&word)?;
            out.add_scaled(&coeff, &t);
        }
        if self.admit(out.len()) {
            self.derivatives.borrow_mut().insert(key, out.clone());
        }
        Ok(out)
    }

    /// Normal form of the right-nested word `:w1 w2 ... wl:` in any order.
    fn word_nf(&self, word: &[Letter]) -> Result<NormalForm> {
        if let Some(m) = Monomial::from_sorted(word.to_vec()) {
            return Ok(NormalForm::monomial(m));
        }
        let (last, init) = word.split_last().expect("nonempty word");
        let mut acc = NormalForm::letter(*last);
        for l in init.iter().rev() {
            acc = self.nop_letter_nf(*l, &acc)?;
        }
        Ok(acc)
    }
}

/// All ways of writing `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut tail in compositions(parts - 1, total - first) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::presets;
    use crate::expr::{deriv, gen, nop, prod};

    #[test]
    fn composition_enumeration() {
        let cs = compositions(3, 2);
        assert_eq!(cs.len(), 6);
        for c in &cs {
            assert_eq!(c.iter().sum::<u32>(), 2);
        }
        let mut sorted = cs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
        assert_eq!(compositions(1, 3), vec![vec![3]]);
        assert_eq!(compositions(2, 0).len(), 1);
    }

    #[test]
    fn generalized_binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(-1, 3), BigInt::from(-1));
        assert_eq!(binomial(-2, 2), BigInt::from(3));
        assert_eq!(binomial(2, 3), BigInt::from(0));
        assert_eq!(binomial(3, -1), BigInt::from(0));
    }

    #[test]
    fn virasoro_basic_products() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let t = NormalForm::generator(0);
        let c = vir.param("c").unwrap();
        assert_eq!(
            e.residue_product(&t, 3, &t).unwrap(),
            NormalForm::term(&c * &Scalar::from_ratio(1, 2), Monomial::identity())
        );
        assert!(e.residue_product(&t, 2, &t).unwrap().is_zero());
        let dt_t = Monomial::from_sorted(vec![Letter::new(0, 1), Letter::new(0, 0)]).unwrap();
        assert_eq!(e.residue_product(&t, -2, &t).unwrap(), NormalForm::monomial(dt_t));
    }

    #[test]
    fn derivative_of_identity_multiple_vanishes() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let t = NormalForm::generator(0);
        let central = e.residue_product(&t, 3, &t).unwrap();
        assert!(e.derivative(&central, 1).unwrap().is_zero());
    }

    #[test]
    fn derived_left_factor_at_pole_zero() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let t = gen(&vir, "T").unwrap();
        let v = e.normalize(&prod(deriv(1, t.clone()), 0, t)).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn identity_is_central() {
        let vir = presets::virasoro();
        let e = Engine::new(&vir);
        let t = NormalForm::generator(0);
        let i = NormalForm::identity();
        assert!(e.contraction(&i, &t).unwrap().is_empty());
        assert_eq!(e.locality_order(&i, &i).unwrap(), 0);
        assert!(e
            .normalize(&prod(gen(&vir, "T").unwrap(), 3, FieldExpr::Identity))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn tiny_budget_aborts() {
        let vir = presets::virasoro();
        let e = Engine::with_budget(&vir, 3);
        let t = gen(&vir, "T").unwrap();
        let tt = nop(t.clone(), t.clone());
        let err = e.normalize(&prod(tt.clone(), 1, tt)).unwrap_err();
        assert_eq!(err, EngineError::BudgetExceeded { budget: 3 });
    }
}
