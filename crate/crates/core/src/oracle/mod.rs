//! Exact mode-level model of an algebra on a highest-weight module.
//!
//! A generator `G` of weight `h` has modes `G(z) = sum_n G_n z^(-n-1)`, so
//! `G_n` raises the level by `h - 1 - n`. Brackets come straight from the
//! singular table, `[A_m, B_n] = sum_i C(m, i) (A_(i) B)_(m+n-i)`, and states
//! are PBW words of creation modes applied to the highest-weight vector.
//! Composite fields act through the mode form of the residue product,
//!
//! ```text
//! (A_(m) B)_n = sum_i (-1)^i C(m, i) [ A_(m-i) B_(n+i) - (-1)^m B_(m+n-i) A_i ]
//! ```
//!
//! which is finite on every state. Nothing here consults the rewriting
//! engine, so agreement between the two is a genuine check.

mod dump;
mod verify;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::engine::binomial;
use crate::expr::{FieldExpr, GenId};
use crate::scalar::{Bindings, GaussRat, ScalarError};

pub use dump::{MatrixDump, ModuleDump};
pub use verify::{Mismatch, VerifyReport};

/// Largest supported level cutoff.
pub const MAX_CUTOFF: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("the mode oracle needs a linear OPE table; `{left}` x `{right}` has a composite term")]
    NonlinearTable { left: String, right: String },
    #[error("binding the table parameters failed: {0}")]
    Scalar(#[from] ScalarError),
    #[error("level cutoff {cutoff} exceeds the supported maximum {max}")]
    CutoffTooLarge { cutoff: u32, max: u32 },
    #[error("mode {n} shifts levels by {shift}, out of reach of cutoff {cutoff}")]
    CutoffTooSmall { n: i64, shift: i64, cutoff: u32 },
    #[error("zero-mode eigenvalues are inconsistent: [{left}, {right}] does not vanish on the highest-weight vector")]
    InconsistentHighestWeight { left: String, right: String },
    #[error("zero-mode eigenvalue given for unknown generator `{0}`")]
    UnknownGenerator(String),
}

/// A mode `G_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub gen: GenId,
    pub n: i64,
}

/// A PBW word `X1 X2 ... Xk |hw>`, leftmost mode first.
pub type Word = Vec<Mode>;

/// Sparse state vector in the PBW basis.
pub type Vector = BTreeMap<Word, GaussRat>;

/// Choice of cyclic vector.
#[derive(Clone, Debug, PartialEq)]
pub enum HighestWeight {
    /// `G_n |0> = 0` for all `n >= 0`.
    Vacuum,
    /// Modes lowering the level annihilate; each zero mode `G_(wt G - 1)`
    /// acts by the given eigenvalue (zero if absent); every raising mode
    /// creates freely.
    Verma(BTreeMap<GenId, GaussRat>),
}

/// One term of an evaluated bracket: `coeff * G_n`, or `coeff * 1`.
#[derive(Clone, Debug)]
enum BracketTerm {
    Mode(Mode, GaussRat),
    Central(GaussRat),
}

/// A linear OPE value as (generator, derivative order, coefficient) terms,
/// with `None` standing for the identity.
type LinearValue = Vec<(Option<(GenId, u32)>, GaussRat)>;

/// Truncated highest-weight module with exact mode action.
pub struct GradedModule<'a> {
    alg: &'a Algebra,
    bindings: Bindings,
    cutoff: u32,
    highest: HighestWeight,
    /// `table[(a, b)][i]` = `a_(i) b`.
    table: HashMap<(GenId, GenId), Vec<LinearValue>>,
    basis: Vec<Vec<Word>>,
    cache: RefCell<HashMap<(Mode, Word), Vector>>,
}

fn sign(e: i64) -> GaussRat {
    if e.rem_euclid(2) == 0 {
        GaussRat::one()
    } else {
        -GaussRat::one()
    }
}

fn binom(n: i64, k: i64) -> GaussRat {
    GaussRat::from_rational(binomial(n, k).into())
}

pub(crate) type FieldMemo = HashMap<(usize, i64, Word), Vector>;

pub(crate) fn add_into(acc: &mut Vector, k: &GaussRat, v: &Vector) {
    if k.is_zero() {
        return;
    }
    for (w, c) in v {
        let slot = acc.entry(w.clone()).or_insert_with(GaussRat::zero);
        *slot += &(k * c);
        if slot.is_zero() {
            acc.remove(w);
        }
    }
}

impl<'a> GradedModule<'a> {
    pub fn build(
        alg: &'a Algebra,
        bindings: Bindings,
        highest: HighestWeight,
        cutoff: u32,
    ) -> Result<Self, OracleError> {
        if cutoff > MAX_CUTOFF {
            return Err(OracleError::CutoffTooLarge {
                cutoff,
                max: MAX_CUTOFF,
            });
        }
        let n = alg.generators().len();
        let mut table = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                let count = alg.table().pole_count(a, b);
                let mut row = Vec::with_capacity(count);
                for i in 0..count {
                    let mut terms = Vec::new();
                    if let Some(nf) = alg.table().get(a, b, i as u32) {
                        for (m, c) in nf.iter() {
                            let v = c.eval(alg.params(), &bindings)?;
                            match m.letters() {
                                [] => terms.push((None, v)),
                                [l] => terms.push((Some((l.gen, l.deriv)), v)),
                                _ => {
                                    return Err(OracleError::NonlinearTable {
                                        left: alg.generator_name(a).to_string(),
                                        right: alg.generator_name(b).to_string(),
                                    })
                                }
                            }
                        }
                    }
                    row.push(terms);
                }
                table.insert((a, b), row);
            }
        }
        if let HighestWeight::Verma(eig) = &highest {
            if let Some(g) = eig.keys().find(|g| **g >= n) {
                return Err(OracleError::UnknownGenerator(format!("#{g}")));
            }
        }
        let mut module = GradedModule {
            alg,
            bindings,
            cutoff,
            highest,
            table,
            basis: Vec::new(),
            cache: RefCell::new(HashMap::new()),
        };
        module.check_zero_modes()?;
        module.basis = module.enumerate_basis();
        Ok(module)
    }

    pub fn algebra(&self) -> &'a Algebra {
        self.alg
    }

    pub fn bindings(&self) -> &Bindings {
        &self.bindings
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn highest_weight(&self) -> &HighestWeight {
        &self.highest
    }

    /// Basis words at each level `0..=cutoff`.
    pub fn basis(&self) -> &[Vec<Word>] {
        &self.basis
    }

    pub fn level_dims(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    /// All basis words in level order, the indexing used by matrices.
    pub fn flat_basis(&self) -> Vec<&Word> {
        self.basis.iter().flatten().collect()
    }

    pub fn shift(&self, m: Mode) -> i64 {
        self.alg.weight_of(m.gen) as i64 - 1 - m.n
    }

    pub fn level(&self, w: &[Mode]) -> i64 {
        w.iter().map(|m| self.shift(*m)).sum()
    }

    fn is_creator(&self, m: Mode) -> bool {
        match self.highest {
            HighestWeight::Vacuum => m.n <= -1,
            HighestWeight::Verma(_) => self.shift(m) > 0,
        }
    }

    /// PBW order: larger level shift first, then generator index.
    fn key(&self, m: Mode) -> (i64, GenId) {
        (-self.shift(m), m.gen)
    }

    fn creators_up_to(&self, level: i64) -> Vec<Mode> {
        let mut out = Vec::new();
        for g in 0..self.alg.generators().len() {
            let h = self.alg.weight_of(g) as i64;
            for s in 1..=level {
                let m = Mode { gen: g, n: h - 1 - s };
                if self.is_creator(m) {
                    out.push(m);
                }
            }
        }
        out.sort_by_key(|m| self.key(*m));
        out
    }

    fn enumerate_basis(&self) -> Vec<Vec<Word>> {
        let top = self.cutoff as i64;
        let creators = self.creators_up_to(top);
        let mut levels = vec![Vec::new(); top as usize + 1];
        let mut word = Vec::new();
        self.extend_words(&creators, 0, 0, top, &mut word, &mut levels);
        levels
    }

    fn extend_words(
        &self,
        creators: &[Mode],
        from: usize,
        level: i64,
        top: i64,
        word: &mut Word,
        out: &mut [Vec<Word>],
    ) {
        out[level as usize].push(word.clone());
        for (k, m) in creators.iter().enumerate().skip(from) {
            let l = level + self.shift(*m);
            if l > top {
                continue;
            }
            word.push(*m);
            self.extend_words(creators, k, l, top, word, out);
            word.pop();
        }
    }

    fn check_zero_modes(&self) -> Result<(), OracleError> {
        let HighestWeight::Verma(_) = &self.highest else {
            return Ok(());
        };
        let n = self.alg.generators().len();
        let zero = |g: GenId| Mode {
            gen: g,
            n: self.alg.weight_of(g) as i64 - 1,
        };
        let hw: Vector = BTreeMap::from([(Vec::new(), GaussRat::one())]);
        for a in 0..n {
            for b in 0..n {
                let bracket = self.bracket_on(zero(a), zero(b), &hw);
                if !bracket.is_empty() {
                    return Err(OracleError::InconsistentHighestWeight {
                        left: self.alg.generator_name(a).to_string(),
                        right: self.alg.generator_name(b).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `[A_m, B_n]` expanded through the table.
    fn bracket(&self, x: Mode, y: Mode) -> Vec<BracketTerm> {
        let mut out = Vec::new();
        let Some(row) = self.table.get(&(x.gen, y.gen)) else {
            return out;
        };
        for (i, terms) in row.iter().enumerate() {
            let i = i as i64;
            let b = binom(x.n, i);
            if b.is_zero() {
                continue;
            }
            let k = x.n + y.n - i;
            for (field, c) in terms {
                let c = &b * c;
                match field {
                    None if k == -1 => out.push(BracketTerm::Central(c)),
                    None => {}
                    Some((g, j)) => {
                        // (d^(j) G)_k = (-1)^j C(k, j) G_(k-j)
                        let j = *j as i64;
                        let d = &sign(j) * &binom(k, j);
                        if !d.is_zero() {
                            out.push(BracketTerm::Mode(Mode { gen: *g, n: k - j }, &c * &d));
                        }
                    }
                }
            }
        }
        out
    }

    fn bracket_on(&self, x: Mode, y: Mode, v: &Vector) -> Vector {
        let mut out = Vector::new();
        for t in self.bracket(x, y) {
            match t {
                BracketTerm::Central(c) => add_into(&mut out, &c, v),
                BracketTerm::Mode(m, c) => add_into(&mut out, &c, &self.apply_mode(m, v)),
            }
        }
        out
    }

    /// `G_n` applied to a state.
    pub fn apply_mode(&self, m: Mode, v: &Vector) -> Vector {
        let mut out = Vector::new();
        for (w, c) in v {
            let r = self.apply_to_word(m, w);
            add_into(&mut out, c, &r);
        }
        out
    }

    fn apply_to_word(&self, x: Mode, w: &Word) -> Vector {
        let key = (x, w.clone());
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let creator = self.is_creator(x);
        let result = match w.first() {
            None => {
                if creator {
                    BTreeMap::from([(vec![x], GaussRat::one())])
                } else if self.shift(x) == 0 {
                    match &self.highest {
                        HighestWeight::Verma(eig) => match eig.get(&x.gen) {
                            Some(l) if !l.is_zero() => {
                                BTreeMap::from([(Vec::new(), l.clone())])
                            }
                            _ => Vector::new(),
                        },
                        HighestWeight::Vacuum => Vector::new(),
                    }
                } else {
                    Vector::new()
                }
            }
            Some(&y) if creator && self.key(x) <= self.key(y) => {
                let mut word = Vec::with_capacity(w.len() + 1);
                word.push(x);
                word.extend_from_slice(w);
                BTreeMap::from([(word, GaussRat::one())])
            }
            Some(&y) => {
                // X Y rest = Y (X rest) + [X, Y] rest
                let rest: Vector = BTreeMap::from([(w[1..].to_vec(), GaussRat::one())]);
                let moved = self.apply_mode(x, &rest);
                let mut out = self.apply_mode(y, &moved);
                let br = self.bracket_on(x, y, &rest);
                add_into(&mut out, &GaussRat::one(), &br);
                out
            }
        };
        self.cache.borrow_mut().insert(key, result.clone());
        result
    }

    fn eval(&self, s: &crate::scalar::Scalar) -> Result<GaussRat, OracleError> {
        Ok(s.eval(self.alg.params(), &self.bindings)?)
    }

    /// `(e)_n` applied to a state, with `e(z) = sum_n e_n z^(-n-1)`.
    pub fn apply_field(&self, e: &FieldExpr, n: i64, v: &Vector) -> Result<Vector, OracleError> {
        let mut memo = FieldMemo::new();
        self.apply_field_memo(e, n, v, &mut memo)
    }

    pub(crate) fn apply_field_memo(
        &self,
        e: &FieldExpr,
        n: i64,
        v: &Vector,
        memo: &mut FieldMemo,
    ) -> Result<Vector, OracleError> {
        let mut out = Vector::new();
        for (w, c) in v {
            let r = self.apply_field_word(e, n, w, memo)?;
            add_into(&mut out, c, &r);
        }
        Ok(out)
    }

    /// Subexpressions are keyed by address, which is stable for the
    /// lifetime of one top-level call.
    fn apply_field_word(
        &self,
        e: &FieldExpr,
        n: i64,
        w: &Word,
        memo: &mut FieldMemo,
    ) -> Result<Vector, OracleError> {
        let key = (e as *const FieldExpr as usize, n, w.clone());
        if let Some(hit) = memo.get(&key) {
            return Ok(hit.clone());
        }
        let level = self.level(w);
        let single: Vector = BTreeMap::from([(w.clone(), GaussRat::one())]);
        let result = match e {
            FieldExpr::Identity => {
                if n == -1 {
                    single
                } else {
                    Vector::new()
                }
            }
            FieldExpr::Generator(g) => self.apply_to_word(Mode { gen: *g, n }, w),
            FieldExpr::Derivative(j, inner) => {
                let j = *j as i64;
                let c = &sign(j) * &binom(n, j);
                let mut out = Vector::new();
                if !c.is_zero() {
                    add_into(&mut out, &c, &self.apply_field_word(inner, n - j, w, memo)?);
                }
                out
            }
            FieldExpr::Sum(terms) => {
                let mut out = Vector::new();
                for (c, t) in terms {
                    let c = self.eval(c)?;
                    if !c.is_zero() {
                        add_into(&mut out, &c, &self.apply_field_word(t, n, w, memo)?);
                    }
                }
                out
            }
            FieldExpr::Product(m, a, b) => {
                let (Some(wa), Some(wb)) = (a.max_weight(self.alg), b.max_weight(self.alg)) else {
                    return Ok(Vector::new());
                };
                let m = *m;
                let mut out = Vector::new();
                // sum_i (-1)^i C(m, i) A_(m-i) B_(n+i); B_(n+i) w vanishes below level 0
                let top = level + wb - 1 - n;
                let top = if m >= 0 { top.min(m) } else { top };
                for i in 0..=top {
                    let k = &sign(i) * &binom(m, i);
                    if k.is_zero() {
                        continue;
                    }
                    let bv = self.apply_field_word(b, n + i, w, memo)?;
                    if bv.is_empty() {
                        continue;
                    }
                    let abv = self.apply_field_memo(a, m - i, &bv, memo)?;
                    add_into(&mut out, &k, &abv);
                }
                // - (-1)^m sum_i (-1)^i C(m, i) B_(m+n-i) A_i
                let top = level + wa - 1;
                let top = if m >= 0 { top.min(m) } else { top };
                for i in 0..=top {
                    let k = -(&sign(m + i) * &binom(m, i));
                    if k.is_zero() {
                        continue;
                    }
                    let av = self.apply_field_word(a, i, w, memo)?;
                    if av.is_empty() {
                        continue;
                    }
                    let bav = self.apply_field_memo(b, m + n - i, &av, memo)?;
                    add_into(&mut out, &k, &bav);
                }
                out
            }
        };
        memo.insert(key, result.clone());
        Ok(result)
    }

    /// Matrix of `e_n` on the truncated basis, as `(row, col) -> entry`
    /// indexed by [`GradedModule::flat_basis`]. Images above the cutoff are
    /// dropped.
    pub fn mode_of(&self, e: &FieldExpr, n: i64) -> Result<ModeMatrix, OracleError> {
        let weights = self.weight_range(e);
        if let Some((lo, hi)) = weights {
            let (smin, smax) = (lo - 1 - n, hi - 1 - n);
            let cut = self.cutoff as i64;
            if smin > cut || smax < -cut {
                return Err(OracleError::CutoffTooSmall {
                    n,
                    shift: if smin > cut { smin } else { smax },
                    cutoff: self.cutoff,
                });
            }
        }
        let flat = self.flat_basis();
        let index: HashMap<&Word, usize> = flat.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        let mut entries = BTreeMap::new();
        let mut memo = FieldMemo::new();
        for (col, w) in flat.iter().enumerate() {
            let v: Vector = BTreeMap::from([((*w).clone(), GaussRat::one())]);
            for (target, c) in self.apply_field_memo(e, n, &v, &mut memo)? {
                if let Some(row) = index.get(&target) {
                    entries.insert((*row, col), c);
                }
            }
        }
        Ok(ModeMatrix {
            dim: flat.len(),
            entries,
        })
    }

    /// Smallest and largest weight of the homogeneous components.
    fn weight_range(&self, e: &FieldExpr) -> Option<(i64, i64)> {
        fn go(alg: &Algebra, e: &FieldExpr) -> Option<(i64, i64)> {
            match e {
                FieldExpr::Identity => Some((0, 0)),
                FieldExpr::Generator(g) => {
                    let w = alg.weight_of(*g) as i64;
                    Some((w, w))
                }
                FieldExpr::Derivative(j, x) => go(alg, x).map(|(a, b)| (a + *j as i64, b + *j as i64)),
                FieldExpr::Product(m, a, b) => {
                    let (a0, a1) = go(alg, a)?;
                    let (b0, b1) = go(alg, b)?;
                    Some((a0 + b0 - m - 1, a1 + b1 - m - 1))
                }
                FieldExpr::Sum(ts) => ts
                    .iter()
                    .filter(|(c, _)| !c.is_zero())
                    .filter_map(|(_, t)| go(alg, t))
                    .reduce(|(a, b), (c, d)| (a.min(c), b.max(d))),
            }
        }
        go(self.alg, e)
    }

    /// Human-readable label of a basis word.
    pub fn label(&self, w: &[Mode]) -> String {
        let vac = match self.highest {
            HighestWeight::Vacuum => "|0>",
            HighestWeight::Verma(_) => "|hw>",
        };
        let mut s = String::new();
        for m in w {
            s.push_str(&format!("{}_{{{}}} ", self.alg.generator_name(m.gen), m.n));
        }
        s.push_str(vac);
        s
    }
}

/// Sparse matrix of a mode on the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMatrix {
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), GaussRat>,
}

impl ModeMatrix {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}
