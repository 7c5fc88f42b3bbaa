//! Field expressions and their canonical normal forms.
//!
//! A [`NormalForm`] is a finite linear combination of standard monomials: the
//! identity, a single divided-power derivative `d^(j) G`, or a right-nested
//! normally ordered word `:x1 x2 ... xl:` whose letters are sorted by
//! generator index ascending and, within a generator, by derivative order
//! descending.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::Algebra;
use crate::scalar::Scalar;

/// Index of a generator in its algebra's declaration list.
pub type GenId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
}

/// A divided-power derivative `d^(deriv) G` of a generator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter {
    pub gen: GenId,
    pub deriv: u32,
}

impl Letter {
    pub fn new(gen: GenId, deriv: u32) -> Self {
        Letter { gen, deriv }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gen
            .cmp(&other.gen)
            .then_with(|| other.deriv.cmp(&self.deriv))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A standard monomial. The empty word is the identity field.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<Letter>);

impl Monomial {
    pub fn identity() -> Self {
        Monomial(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Monomial(vec![l])
    }

    /// Wrap an already sorted word; `None` when the ordering is violated.
    pub fn from_sorted(word: Vec<Letter>) -> Option<Self> {
        if word.windows(2).all(|w| w[0] <= w[1]) {
            Some(Monomial(word))
        } else {
            None
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Everything after the first letter.
    pub(crate) fn rest(&self) -> Monomial {
        Monomial(self.0.get(1..).map(<[Letter]>::to_vec).unwrap_or_default())
    }

    /// Prepend a letter that is not larger than the current first letter.
    pub(crate) fn prepend(&self, l: Letter) -> Monomial {
        debug_assert!(self.first().is_none_or(|f| l <= f));
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(l);
        v.extend_from_slice(&self.0);
        Monomial(v)
    }

    pub fn weight(&self, alg: &Algebra) -> i64 {
        self.0
            .iter()
            .map(|l| alg.weight_of(l.gen) as i64 + l.deriv as i64)
            .sum()
    }
}

/// Finite map from standard monomials to nonzero scalars.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct NormalForm {
    terms: BTreeMap<Monomial, Scalar>,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm::default()
    }

    pub fn identity() -> Self {
        NormalForm::monomial(Monomial::identity())
    }

    pub fn monomial(m: Monomial) -> Self {
        NormalForm::term(Scalar::one(), m)
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        NormalForm { terms }
    }

    pub fn generator(g: GenId) -> Self {
        NormalForm::monomial(Monomial::letter(Letter::new(g, 0)))
    }

    pub fn letter(l: Letter) -> Self {
        NormalForm::monomial(Monomial::letter(l))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, k: &Scalar, other: &NormalForm) {
        if k.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            if k.is_one() {
                self.add_term(m.clone(), c);
            } else {
                self.add_term(m.clone(), &(k * c));
            }
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        out.add_scaled(&Scalar::one(), other);
        out
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        out.add_scaled(&Scalar::from_int(-1), other);
        out
    }

    pub fn scale(&self, k: &Scalar) -> NormalForm {
        if k.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn neg(&self) -> NormalForm {
        self.scale(&Scalar::from_int(-1))
    }

    /// Apply a coefficient map, dropping terms that become zero.
    pub fn try_map_coeffs<E>(
        &self,
        f: impl Fn(&Scalar) -> Result<Scalar, E>,
    ) -> Result<NormalForm, E> {
        let mut out = NormalForm::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c)?);
        }
        Ok(out)
    }

    /// Largest monomial weight, `None` for zero.
    pub fn max_weight(&self, alg: &Algebra) -> Option<i64> {
        self.terms.keys().map(|m| m.weight(alg)).max()
    }

    pub fn weight(&self, alg: &Algebra) -> Weight {
        let mut ws = self.terms.keys().map(|m| m.weight(alg));
        match ws.next() {
            None => Weight::Zero,
            Some(w) => {
                if ws.all(|x| x == w) {
                    Weight::Of(w)
                } else {
                    Weight::Inhomogeneous
                }
            }
        }
    }

    /// Split into homogeneous components keyed by weight.
    pub fn components(&self, alg: &Algebra) -> BTreeMap<i64, NormalForm> {
        let mut out: BTreeMap<i64, NormalForm> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.weight(alg))
                .or_default()
                .add_term(m.clone(), c);
        }
        out
    }

    /// The same field written as an expression tree.
    pub fn to_expr(&self) -> FieldExpr {
        FieldExpr::Sum(
            self.terms
                .iter()
                .map(|(m, c)| (c.clone(), monomial_expr(m)))
                .collect(),
        )
    }

    /// Text form, e.g. `2*T + 1/2*c*I - :d T T:`.
    pub fn render(&self, alg: &Algebra) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let mono = render_monomial(m, alg);
            let (neg, body) = if c.is_one() {
                (false, mono)
            } else if (-c).is_one() {
                (true, mono)
            } else if c.is_negative_like() {
                (true, format!("{}*{mono}", (-c).render(alg.params())))
            } else if c.is_single_term() {
                (false, format!("{}*{mono}", c.render(alg.params())))
            } else {
                (false, format!("({})*{mono}", c.render(alg.params())))
            };
            match (idx, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }
}

fn monomial_expr(m: &Monomial) -> FieldExpr {
    let mut letters = m.letters().iter().rev();
    let Some(last) = letters.next() else {
        return FieldExpr::Identity;
    };
    let mut acc = letter_expr(*last);
    for l in letters {
        acc = FieldExpr::Product(-1, Box::new(letter_expr(*l)), Box::new(acc));
    }
    acc
}

fn letter_expr(l: Letter) -> FieldExpr {
    let g = FieldExpr::Generator(l.gen);
    if l.deriv == 0 {
        g
    } else {
        FieldExpr::Derivative(l.deriv, Box::new(g))
    }
}

pub fn render_letter(l: Letter, alg: &Algebra) -> String {
    let name = alg.generator_name(l.gen);
    match l.deriv {
        0 => name.to_string(),
        1 => format!("d {name}"),
        j => format!("d^({j}) {name}"),
    }
}

pub fn render_monomial(m: &Monomial, alg: &Algebra) -> String {
    match m.letters() {
        [] => "I".to_string(),
        [l] => render_letter(*l, alg),
        ls => format!(
            ":{}:",
            ls.iter()
                .map(|l| render_letter(*l, alg))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    }
}

/// Conformal weight of an expression.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Weight {
    Of(i64),
    Inhomogeneous,
    /// The zero field, homogeneous of every weight.
    Zero,
}

/// Expression tree over the generators of an algebra.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FieldExpr {
    Identity,
    Generator(GenId),
    /// Divided-power derivative `d^(j) = (1/j!) d^j`.
    Derivative(u32, Box<FieldExpr>),
    /// `left_(m) right`.
    Product(i64, Box<FieldExpr>, Box<FieldExpr>),
    Sum(Vec<(Scalar, FieldExpr)>),
}

impl FieldExpr {
    pub fn weight(&self, alg: &Algebra) -> Weight {
        match self {
            FieldExpr::Identity => Weight::Of(0),
            FieldExpr::Generator(g) => Weight::Of(alg.weight_of(*g) as i64),
            FieldExpr::Derivative(j, e) => match e.weight(alg) {
                Weight::Of(w) => Weight::Of(w + *j as i64),
                other => other,
            },
            FieldExpr::Product(m, a, b) => match (a.weight(alg), b.weight(alg)) {
                (Weight::Of(x), Weight::Of(y)) => Weight::Of(x + y - m - 1),
                (Weight::Zero, _) | (_, Weight::Zero) => Weight::Zero,
                _ => Weight::Inhomogeneous,
            },
            FieldExpr::Sum(terms) => {
                let mut acc = Weight::Zero;
                for (c, e) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    match (acc, e.weight(alg)) {
                        (_, Weight::Zero) => {}
                        (Weight::Zero, w) => acc = w,
                        (Weight::Of(x), Weight::Of(y)) if x == y => {}
                        _ => return Weight::Inhomogeneous,
                    }
                }
                acc
            }
        }
    }

    /// Upper bound on the weights of all components; `None` for a
    /// structurally zero expression.
    pub fn max_weight(&self, alg: &Algebra) -> Option<i64> {
        match self {
            FieldExpr::Identity => Some(0),
            FieldExpr::Generator(g) => Some(alg.weight_of(*g) as i64),
            FieldExpr::Derivative(j, e) => e.max_weight(alg).map(|w| w + *j as i64),
            FieldExpr::Product(m, a, b) => Some(a.max_weight(alg)? + b.max_weight(alg)? - m - 1),
            FieldExpr::Sum(terms) => terms
                .iter()
                .filter(|(c, _)| !c.is_zero())
                .filter_map(|(_, e)| e.max_weight(alg))
                .max(),
        }
    }

    /// Generators referenced by the expression.
    pub fn generators(&self, out: &mut Vec<GenId>) {
        match self {
            FieldExpr::Identity => {}
            FieldExpr::Generator(g) => out.push(*g),
            FieldExpr::Derivative(_, e) => e.generators(out),
            FieldExpr::Product(_, a, b) => {
                a.generators(out);
                b.generators(out);
            }
            FieldExpr::Sum(ts) => ts.iter().for_each(|(_, e)| e.generators(out)),
        }
    }

    /// Scalars appearing as coefficients.
    pub fn scalars(&self) -> Vec<&Scalar> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a FieldExpr, out: &mut Vec<&'a Scalar>) {
            match e {
                FieldExpr::Identity | FieldExpr::Generator(_) => {}
                FieldExpr::Derivative(_, e) => walk(e, out),
                FieldExpr::Product(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                FieldExpr::Sum(ts) => {
                    for (c, e) in ts {
                        out.push(c);
                        walk(e, out);
                    }
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn scaled(self, c: Scalar) -> FieldExpr {
        FieldExpr::Sum(vec![(c, self)])
    }

    /// Text form in the expression grammar.
    pub fn render(&self, alg: &Algebra) -> String {
        match self {
            FieldExpr::Identity => "I".to_string(),
            FieldExpr::Generator(g) => alg.generator_name(*g).to_string(),
            FieldExpr::Derivative(j, e) => {
                let inner = e.render_atom(alg);
                if *j == 1 {
                    format!("d {inner}")
                } else {
                    format!("d^({j}) {inner}")
                }
            }
            FieldExpr::Product(-1, _, _) => {
                let mut items = Vec::new();
                let mut cur = self;
                while let FieldExpr::Product(-1, a, b) = cur {
                    // a nested normal ordering in front would read as the closing colon
                    items.push(match **a {
                        FieldExpr::Product(-1, _, _) => format!("({})", a.render(alg)),
                        _ => a.render_atom(alg),
                    });
                    cur = b;
                }
                items.push(cur.render_atom(alg));
                format!(":{}:", items.join(" "))
            }
            FieldExpr::Product(m, a, b) => {
                format!("{}_({m}) {}", a.render_atom(alg), b.render_atom(alg))
            }
            FieldExpr::Sum(terms) => {
                if terms.is_empty() {
                    return "0".to_string();
                }
                let mut out = String::new();
                for (idx, (c, e)) in terms.iter().enumerate() {
                    let body = e.render_atom(alg);
                    let (neg, text) = if c.is_one() {
                        (false, body)
                    } else if (-c).is_one() {
                        (true, body)
                    } else if c.is_negative_like() {
                        (true, format!("{}*{body}", (-c).render(alg.params())))
                    } else if c.is_single_term() {
                        (false, format!("{}*{body}", c.render(alg.params())))
                    } else {
                        (false, format!("({})*{body}", c.render(alg.params())))
                    };
                    if idx == 0 {
                        if neg {
                            out.push('-');
                        }
                    } else {
                        out.push_str(if neg { " - " } else { " + " });
                    }
                    out.push_str(&text);
                }
                out
            }
        }
    }

    fn render_atom(&self, alg: &Algebra) -> String {
        match self {
            FieldExpr::Identity | FieldExpr::Generator(_) | FieldExpr::Product(-1, _, _) => {
                self.render(alg)
            }
            // a bare `(0)` would read back as a scalar
            FieldExpr::Sum(terms) if terms.is_empty() => "(0*I)".to_string(),
            _ => format!("({})", self.render(alg)),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Of(w) => write!(f, "{w}"),
            Weight::Inhomogeneous => f.write_str("inhomogeneous"),
            Weight::Zero => f.write_str("zero"),
        }
    }
}

/// Generator by name.
pub fn gen(alg: &Algebra, name: &str) -> Result<FieldExpr, ExprError> {
    alg.generator_id(name)
        .map(FieldExpr::Generator)
        .ok_or_else(|| ExprError::UnknownGenerator(name.to_string()))
}

/// Normally ordered product `a_(-1) b`.
pub fn nop(a: FieldExpr, b: FieldExpr) -> FieldExpr {
    prod(a, -1, b)
}

pub fn prod(a: FieldExpr, m: i64, b: FieldExpr) -> FieldExpr {
    FieldExpr::Product(m, Box::new(a), Box::new(b))
}

/// `d^(j) a`; order zero is the identity map.
pub fn deriv(j: u32, a: FieldExpr) -> FieldExpr {
    if j == 0 {
        a
    } else {
        FieldExpr::Derivative(j, Box::new(a))
    }
}

pub fn lincomb(pairs: impl IntoIterator<Item = (Scalar, FieldExpr)>) -> FieldExpr {
    FieldExpr::Sum(pairs.into_iter().collect())
}
