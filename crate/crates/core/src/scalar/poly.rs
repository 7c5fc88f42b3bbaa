//! Sparse multivariate polynomials over the Gaussian rationals.
//!
//! Variables are indices into the owning algebra's parameter list. Terms are
//! kept in graded-lex order with variable 0 most significant, so the leading
//! term is the last entry.

use std::cmp::Ordering;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::gauss::GaussRat;

/// Exponent vector with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Exponents(SmallVec<[u32; 4]>);

impl Exponents {
    pub fn one() -> Self {
        Exponents(SmallVec::new())
    }

    pub fn var(v: usize) -> Self {
        let mut e = SmallVec::from_elem(0, v + 1);
        e[v] = 1;
        Exponents(e)
    }

    fn from_vec(mut v: SmallVec<[u32; 4]>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Exponents(v)
    }

    pub fn get(&self, v: usize) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(v, e)| (v, *e))
    }

    fn mul(&self, other: &Exponents) -> Exponents {
        let n = self.0.len().max(other.0.len());
        Exponents::from_vec((0..n).map(|v| self.get(v) + other.get(v)).collect())
    }

    fn div(&self, other: &Exponents) -> Option<Exponents> {
        let n = self.0.len().max(other.0.len());
        let mut out = SmallVec::with_capacity(n);
        for v in 0..n {
            out.push(self.get(v).checked_sub(other.get(v))?);
        }
        Some(Exponents::from_vec(out))
    }

    fn with(&self, v: usize, e: u32) -> Exponents {
        let mut out = self.0.clone();
        if out.len() <= v {
            out.resize(v + 1, 0);
        }
        out[v] = e;
        Exponents::from_vec(out)
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for v in 0..n {
                match self.get(v).cmp(&other.get(v)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    /// Sorted ascending by exponent, no zero coefficients.
    terms: Terms,
}

type Terms = SmallVec<[(Exponents, GaussRat); 1]>;

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut terms = Terms::new();
        if !c.is_zero() {
            terms.push((Exponents::one(), c));
        }
        Poly { terms }
    }

    pub fn var(v: usize) -> Self {
        let mut terms = Terms::new();
        terms.push((Exponents::var(v), GaussRat::one()));
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0].0.is_one()
            && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(e, _)| e.is_one())
    }

    /// Constant value of a polynomial free of variables.
    pub fn constant_value(&self) -> Option<GaussRat> {
        if !self.is_constant() {
            return None;
        }
        Some(
            self.terms
                .first()
                .map(|(_, c)| c.clone())
                .unwrap_or_else(GaussRat::zero),
        )
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &GaussRat)> {
        self.terms.iter().map(|(e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn leading(&self) -> Option<(&Exponents, &GaussRat)> {
        self.terms.last().map(|(e, c)| (e, c))
    }

    pub fn leading_coeff(&self) -> GaussRat {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(GaussRat::zero)
    }

    /// Sort, merge equal exponents and drop zeros.
    fn from_terms(mut terms: Terms) -> Poly {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = Terms::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += &c,
                _ => {
                    if matches!(out.last(), Some((_, lc)) if lc.is_zero()) {
                        out.pop();
                    }
                    out.push((e, c));
                }
            }
        }
        if matches!(out.last(), Some((_, lc)) if lc.is_zero()) {
            out.pop();
        }
        Poly { terms: out }
    }

    fn add_term(&mut self, e: Exponents, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(x, _)| x.cmp(&e)) {
            Ok(i) => {
                self.terms[i].1 += &c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (e, c)),
        }
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Terms::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let rhs = |c: &GaussRat| if negate { -c } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0.clone(), rhs(&b[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(e, c)| (e.clone(), rhs(c))));
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &GaussRat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    fn mul_term(&self, e: &Exponents, k: &GaussRat) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e2, c)| (e2.mul(e), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.is_constant() {
            return other.scale(&self.terms[0].1);
        }
        if other.is_constant() {
            return self.scale(&other.terms[0].1);
        }
        let mut out = Terms::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.push((e1.mul(e2), c1 * c2));
            }
        }
        Poly::from_terms(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Divide by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if divisor.is_one() {
            return Some(self.clone());
        }
        let (lead_e, lead_c) = divisor.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let lead_inv = lead_c.inv()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((e, c)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
            let qe = e.div(&lead_e)?;
            let qc = &c * &lead_inv;
            rem = rem.sub(&divisor.mul_term(&qe, &qc));
            quot.add_term(qe, qc);
        }
        Some(quot)
    }

    /// Highest variable index occurring, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|(e, _)| e.0.len().checked_sub(1))
            .max()
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e.get(v)).max().unwrap_or(0)
    }

    /// Coefficient of `v^k`, as a polynomial free of `v`.
    fn coeff_in(&self, v: usize, k: u32) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e.get(v) == k)
                .map(|(e, c)| (e.with(v, 0), c.clone()))
                .collect(),
        )
    }

    fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let d = self.degree_in(v);
        (0..=d).map(|k| self.coeff_in(v, k)).collect()
    }

    fn shift(&self, v: usize, k: u32) -> Poly {
        if k == 0 {
            return self.clone();
        }
        Poly::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (e.with(v, e.get(v) + k), c.clone()))
                .collect(),
        )
    }

    /// Gcd of the coefficients with respect to `v`.
    fn content_in(&self, v: usize) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_in(&self, v: usize) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides polynomial")
    }

    /// Pseudo-remainder of `self` by `g` with respect to `v`.
    fn pseudo_rem(&self, g: &Poly, v: usize) -> Poly {
        let dg = g.degree_in(v);
        let lc_g = g.coeff_in(v, dg);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= dg {
            let dr = r.degree_in(v);
            let lc_r = r.coeff_in(v, dr);
            r = r.mul(&lc_g).sub(&g.mul(&lc_r).shift(v, dr - dg));
        }
        r
    }

    /// Substitute constants for every variable.
    pub fn eval_with(&self, value: &dyn Fn(usize) -> GaussRat) -> GaussRat {
        let mut acc = GaussRat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, k) in e.entries() {
                t = &t * &value(v).pow(k);
            }
            acc += &t;
        }
        acc
    }

    /// Substitute polynomials for variables (identity on unmapped ones).
    pub fn substitute(&self, value: &dyn Fn(usize) -> Option<Poly>) -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (v, k) in e.entries() {
                let base = value(v).unwrap_or_else(|| Poly::var(v));
                t = t.mul(&base.pow(k));
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .terms
            .iter()
            .flat_map(|(e, _)| e.entries().map(|(v, _)| v).collect::<Vec<_>>())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// Monic greatest common divisor (zero only when both inputs are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let v = a.max_var().max(b.max_var()).expect("non-constant");
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 {
        return gcd(a, &b.content_in(v));
    }
    if db == 0 {
        return gcd(&a.content_in(v), b);
    }
    let (ca, cb) = (a.content_in(v), b.content_in(v));
    let content = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let (mut f, mut g) = if da >= db { (pa, pb) } else { (pb, pa) };
    loop {
        let r = f.pseudo_rem(&g, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            g = Poly::one();
            break;
        }
        f = g;
        g = r.primitive_in(v);
    }
    content.mul(&g.primitive_in(v)).monic()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Poly {
        Poly::constant(GaussRat::from_int(n))
    }

    #[test]
    fn graded_lex_leading_term() {
        // x0 + x1^2: degree wins
        let p = Poly::var(0).add(&Poly::var(1).pow(2));
        assert_eq!(p.leading().unwrap().0, &Exponents::from_vec(smallvec::smallvec![0, 2]));
        // x0*x1 vs x1^2: same degree, x0 more significant
        let q = Poly::var(0).mul(&Poly::var(1)).add(&Poly::var(1).pow(2));
        assert_eq!(q.leading().unwrap().0, &Exponents::from_vec(smallvec::smallvec![1, 1]));
    }

    #[test]
    fn exact_division() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let a = x.add(&y);
        let b = x.sub(&y).add(&c(3));
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a));
        assert!(x.div_exact(&y).is_none());
    }

    #[test]
    fn univariate_gcd() {
        let x = Poly::var(0);
        let a = x.add(&c(2)).mul(&x.sub(&c(1)));
        let b = x.add(&c(2)).mul(&x.add(&c(5)));
        assert_eq!(gcd(&a, &b), x.add(&c(2)));
        assert!(gcd(&x.add(&c(1)), &x.add(&c(2))).is_one());
    }

    #[test]
    fn multivariate_gcd() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let z = Poly::var(2);
        let common = x.mul(&y).add(&z.scale(&GaussRat::i())).add(&c(1));
        let a = common.mul(&x.add(&y)).mul(&z);
        let b = common.mul(&x.sub(&z).add(&c(4))).mul(&y.pow(2));
        assert_eq!(gcd(&a, &b), common.monic());
    }

    #[test]
    fn gcd_with_constant_content() {
        let x = Poly::var(0);
        let a = x.scale(&GaussRat::from_int(6));
        let b = x.scale(&GaussRat::from_int(4)).mul(&x);
        assert_eq!(gcd(&a, &b), x);
    }
}
