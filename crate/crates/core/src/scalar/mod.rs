//! Exact coefficients: rational functions in the algebra parameters with
//! Gaussian-rational coefficients.

mod gauss;
mod parse;
mod poly;
mod rat;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use gauss::GaussRat;
pub use poly::{gcd, Exponents, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("denominator vanishes at the given binding")]
    Pole,
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

/// Ordered parameter symbols of an algebra. The declaration order fixes the
/// monomial order used by canonical forms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamSpace {
    names: Vec<String>,
}

impl ParamSpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        ParamSpace {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn push(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    /// The parameter as a scalar.
    pub fn param(&self, name: &str) -> Result<Scalar, ScalarError> {
        self.index_of(name)
            .map(Scalar::param)
            .ok_or_else(|| ScalarError::UnknownParameter(name.to_string()))
    }

    pub fn bind<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, GaussRat)>,
    ) -> Result<Bindings, ScalarError> {
        let mut values = BTreeMap::new();
        for (name, v) in pairs {
            let idx = self
                .index_of(name)
                .ok_or_else(|| ScalarError::UnknownParameter(name.to_string()))?;
            values.insert(idx, v);
        }
        Ok(Bindings { values })
    }
}

/// Concrete values for (some of) the parameters of a [`ParamSpace`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    values: BTreeMap<usize, GaussRat>,
}

impl Bindings {
    pub fn get(&self, idx: usize) -> Option<&GaussRat> {
        self.values.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &GaussRat)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn insert(&mut self, idx: usize, value: GaussRat) {
        self.values.insert(idx, value);
    }
}

/// Canonical rational function `num / den`.
///
/// The pair is reduced by its gcd and the denominator is monic under the
/// graded-lex order, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::constant(GaussRat::from_int(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar::constant(GaussRat::from_rational(BigRational::from_integer(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::constant(GaussRat::from_ratio(num, den))
    }

    pub fn i() -> Self {
        Scalar::constant(GaussRat::i())
    }

    pub fn constant(c: GaussRat) -> Self {
        Scalar {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn param(idx: usize) -> Self {
        Scalar {
            num: Poly::var(idx),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar {
            num: p,
            den: Poly::one(),
        }
    }

    /// Build a canonical quotient.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Scalar::zero();
        }
        if den.is_constant() {
            let k = den.constant_value().expect("constant").inv().expect("nonzero");
            return Scalar {
                num: num.scale(&k),
                den: Poly::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            Scalar { num, den }
        } else {
            let k = lc.inv().expect("nonzero");
            Scalar {
                num: num.scale(&k),
                den: den.scale(&k),
            }
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    /// Parameters occurring in numerator or denominator.
    pub fn variables(&self) -> Vec<usize> {
        let mut v = self.num.variables();
        v.extend(self.den.variables());
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if rhs.den.is_one() && rhs.num.is_constant() {
            let k = rhs.num.constant_value().expect("constant").inv().expect("nonzero");
            return Ok(Scalar {
                num: self.num.scale(&k),
                den: self.den.clone(),
            });
        }
        Ok(Self::canonical(
            self.num.mul(&rhs.den),
            self.den.mul(&rhs.num),
        ))
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        Scalar::one().checked_div(self)
    }

    pub fn pow(&self, e: i32) -> Result<Scalar, ScalarError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        Ok(acc)
    }

    /// Evaluate at a complete binding of the occurring parameters.
    pub fn eval(&self, space: &ParamSpace, bindings: &Bindings) -> Result<GaussRat, ScalarError> {
        for v in self.variables() {
            if bindings.get(v).is_none() {
                let name = space
                    .names()
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| format!("#{v}"));
                return Err(ScalarError::UnboundParameter(name));
            }
        }
        let value = |v: usize| bindings.get(v).cloned().expect("checked above");
        let d = self.den.eval_with(&value);
        if d.is_zero() {
            return Err(ScalarError::Pole);
        }
        let n = self.num.eval_with(&value);
        Ok(&n * &d.inv().expect("nonzero"))
    }

    /// Like [`Scalar::eval`] but returns a constant scalar.
    pub fn eval_scalar(&self, space: &ParamSpace, bindings: &Bindings) -> Result<Scalar, ScalarError> {
        self.eval(space, bindings).map(Scalar::constant)
    }

    /// Substitute other scalars for some parameters.
    pub fn substitute(&self, value: &dyn Fn(usize) -> Option<Scalar>) -> Result<Scalar, ScalarError> {
        fn subst_poly(p: &Poly, value: &dyn Fn(usize) -> Option<Scalar>) -> Result<Scalar, ScalarError> {
            let mut acc = Scalar::zero();
            for (e, c) in p.terms() {
                let mut t = Scalar::constant(c.clone());
                for (v, k) in e.entries() {
                    let base = value(v).unwrap_or_else(|| Scalar::param(v));
                    t = &t * &base.pow(k as i32)?;
                }
                acc = &acc + &t;
            }
            Ok(acc)
        }
        let n = subst_poly(&self.num, value)?;
        let d = subst_poly(&self.den, value)?;
        n.checked_div(&d).map_err(|_| ScalarError::Pole)
    }

    /// Text form in the fixed scalar grammar.
    pub fn render(&self, space: &ParamSpace) -> String {
        let num = render_poly(&self.num, space);
        if self.den.is_one() {
            return num;
        }
        let num = if self.num.num_terms() > 1 {
            format!("({num})")
        } else {
            num
        };
        let den = render_poly(&self.den, space);
        let bare_den = self.den.num_terms() == 1
            && self
                .den
                .leading()
                .is_some_and(|(e, c)| c.is_one() && e.entries().count() == 1);
        if bare_den {
            format!("{num}/{den}")
        } else {
            format!("{num}/({den})")
        }
    }

    /// True when [`Scalar::render`] yields a single product (no top-level `+`/`-`
    /// between terms), so it can be juxtaposed with `*` without parentheses.
    pub fn is_single_term(&self) -> bool {
        self.num.num_terms() <= 1
    }

    /// True when the rendering starts with a removable minus sign.
    pub fn is_negative_like(&self) -> bool {
        self.num.num_terms() == 1
            && self
                .num
                .leading()
                .is_some_and(|(_, c)| c.is_negative_like())
    }

    pub fn parse(text: &str, space: &ParamSpace) -> Result<Scalar, ScalarError> {
        parse::parse_scalar(text, space)
    }
}

fn render_monomial(e: &Exponents, space: &ParamSpace) -> String {
    e.entries()
        .map(|(v, k)| {
            let name = space
                .names()
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("p{v}"));
            if k == 1 {
                name
            } else {
                format!("{name}^{k}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn render_poly(p: &Poly, space: &ParamSpace) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (e, c)) in p.terms().rev().enumerate() {
        let term = if e.is_one() {
            c.render()
        } else {
            let m = render_monomial(e, space);
            if c.is_one() {
                m
            } else if (-c).is_one() {
                format!("-{m}")
            } else {
                format!("{}*{m}", c.render())
            }
        };
        if idx == 0 {
            out.push_str(&term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = self.num.add(&rhs.num);
            if self.den.is_one() {
                return Scalar::from_poly(num);
            }
            return Scalar::canonical(num, self.den.clone());
        }
        Scalar::canonical(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Scalar::from_poly(self.num.mul(&rhs.num));
        }
        Scalar::canonical(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<GaussRat> for Scalar {
    fn from(c: GaussRat) -> Self {
        Scalar::constant(c)
    }
}

/// Renders with placeholder parameter names `p0, p1, ...`; use
/// [`Scalar::render`] with the algebra's [`ParamSpace`] for real output.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&ParamSpace::default()))
    }
}

/// Parse a rational literal like `-3/4` or `2`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(BigRational::from_integer(t.parse().ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> ParamSpace {
        ParamSpace::new(["c", "k", "h"])
    }

    fn p(s: &str) -> Scalar {
        Scalar::parse(s, &space()).unwrap()
    }

    #[test]
    fn cancellation() {
        let k2 = p("k + 2");
        assert_eq!(k2.checked_div(&k2).unwrap(), Scalar::one());
    }

    #[test]
    fn ring_arithmetic() {
        assert_eq!(&p("c/2") * &Scalar::from_int(6), p("3*c"));
        assert_eq!(p("c/2").render(&space()), "1/2*c");
    }

    #[test]
    fn substitution_at_level_two() {
        let s = ParamSpace::new(["k"]);
        let x = Scalar::parse("3*k/(k+2)", &s).unwrap();
        let b = s.bind([("k", GaussRat::from_int(2))]).unwrap();
        assert_eq!(x.eval(&s, &b).unwrap(), GaussRat::from_ratio(3, 2));
    }

    #[test]
    fn eval_examples() {
        let s = space();
        let b = s.bind([("c", GaussRat::from_ratio(1, 2))]).unwrap();
        assert_eq!(p("8 + c").eval(&s, &b).unwrap(), GaussRat::from_ratio(17, 2));

        let s2 = ParamSpace::new(["k", "hv"]);
        let x = Scalar::parse("k + hv", &s2).unwrap();
        let b2 = s2
            .bind([("hv", GaussRat::from_int(2)), ("k", GaussRat::from_int(1))])
            .unwrap();
        assert_eq!(x.eval(&s2, &b2).unwrap(), GaussRat::from_int(3));

        let pole = p("1/(k+2)");
        let b3 = s.bind([("k", GaussRat::from_int(-2))]).unwrap();
        assert_eq!(pole.eval(&s, &b3), Err(ScalarError::Pole));
        assert_eq!(
            pole.eval(&s, &Bindings::default()),
            Err(ScalarError::UnboundParameter("k".into()))
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(p("c").checked_div(&Scalar::zero()), Err(ScalarError::DivisionByZero));
        assert!(Scalar::parse("1/(c - c)", &space()).is_err());
    }

    #[test]
    fn denominator_is_monic() {
        let x = p("1/(2*k + 4)");
        assert_eq!(x.render(&space()), "1/2/(k + 2)");
        assert!(x.denominator().leading_coeff().is_one());
        assert_eq!(p("(k^2 - 4)/(2*k - 4)"), p("k/2 + 1"));
    }

    #[test]
    fn gaussian_coefficients() {
        let z = p("(1 + i)*c");
        assert_eq!(&z * &p("(1 - i)"), p("2*c"));
        assert_eq!(p("i*i"), Scalar::from_int(-1));
        assert_eq!(p("-i*k").render(&space()), "-i*k");
    }

    #[test]
    fn render_parse_examples() {
        for text in [
            "0",
            "3*c",
            "c^2 - 2*c*k + 1/3",
            "(c + 1)/(k + 2)",
            "3*k/(k + 2)",
            "1/c",
            "-1/k^2",
            "(1 + 2*i)*c + i",
        ] {
            let x = p(text);
            let r = x.render(&space());
            assert_eq!(p(&r), x, "{text} -> {r}");
        }
    }

    #[test]
    fn substitute_sugawara_central_charge() {
        let s = ParamSpace::new(["c", "k"]);
        let x = Scalar::parse("c/2", &s).unwrap();
        let c_of_k = Scalar::parse("3*k/(k+2)", &s).unwrap();
        let y = x.substitute(&|v| (v == 0).then(|| c_of_k.clone())).unwrap();
        assert_eq!(y, Scalar::parse("3*k/(2*k+4)", &s).unwrap());
    }
}
