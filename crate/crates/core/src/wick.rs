//! Generalized Wick theorems as explicit contour integrals.
//!
//! Both theorems are assembled as a list of integrand terms
//! `X(w) / ((z-x)^zx (x-w)^xw (z-w)^zw)` and integrated over `x` around `w`
//! with [`contour_kernel`]. This is a second route to the singular OPE,
//! independent of the residue-product recursion in the engine except for
//! the two-point contractions it starts from.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{binom_scalar, Engine, EngineError};
use crate::expr::NormalForm;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WickError {
    #[error("contour kernel needs positive exponents, got m = {m}, n = {n}")]
    InvalidKernel { m: i64, n: i64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `(1/2 pi i) oint_w dx / ((z-x)^m (x-w)^n) = C(m+n-2, n-1) / (z-w)^(m+n-1)`,
/// returned as `(coefficient, pole order)`.
pub fn contour_kernel(m: i64, n: i64) -> Result<(Scalar, u32), WickError> {
    if m < 1 || n < 1 {
        return Err(WickError::InvalidKernel { m, n });
    }
    Ok((binom_scalar(m + n - 2, n - 1), (m + n - 1) as u32))
}

/// Singular part of an OPE: pole order in `(z-w)` to coefficient field.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SingularSeries {
    pub poles: BTreeMap<u32, NormalForm>,
}

impl SingularSeries {
    pub fn add(&mut self, pole: u32, k: &Scalar, v: &NormalForm) {
        let slot = self.poles.entry(pole).or_default();
        slot.add_scaled(k, v);
        if slot.is_zero() {
            self.poles.remove(&pole);
        }
    }

    pub fn get(&self, pole: u32) -> NormalForm {
        self.poles.get(&pole).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn highest_pole(&self) -> u32 {
        self.poles.keys().next_back().copied().unwrap_or(0)
    }

    /// Poles of `A(z) B(w)` from the contractions `A_(i) B`, which sit at
    /// order `i + 1`.
    pub fn from_contraction(pairs: Vec<(u32, NormalForm)>) -> Self {
        SingularSeries {
            poles: pairs.into_iter().map(|(i, v)| (i + 1, v)).collect(),
        }
    }

    /// Back to residue products: `(i, A_(i) B)` in ascending `i`.
    pub fn to_contraction(&self) -> Vec<(u32, NormalForm)> {
        self.poles.iter().map(|(p, v)| (p - 1, v.clone())).collect()
    }
}

/// One term `coeff * field(w) / ((z-x)^zx (x-w)^xw (z-w)^zw)`.
#[derive(Clone, Debug)]
struct IntegrandTerm {
    field: NormalForm,
    zx: i64,
    xw: i64,
    zw: i64,
}

fn integrate(terms: &[IntegrandTerm]) -> Result<SingularSeries, WickError> {
    let mut out = SingularSeries::default();
    for t in terms {
        let (k, pole) = if t.zx >= 1 && t.xw >= 1 {
            let (k, p) = contour_kernel(t.zx, t.xw)?;
            (k, p as i64 + t.zw)
        } else if t.zx == 0 && t.xw == 1 {
            (Scalar::one(), t.zw)
        } else {
            // no pole at x = w, or a pure pole of order >= 2: residue zero
            continue;
        };
        if pole >= 1 {
            out.add(pole as u32, &k, &t.field);
        }
    }
    Ok(out)
}

fn top(engine: &Engine, a: &NormalForm, b: &NormalForm) -> i64 {
    let alg = engine.algebra();
    match (a.max_weight(alg), b.max_weight(alg)) {
        (Some(x), Some(y)) => x + y - 1,
        _ => -1,
    }
}

/// Singular part of `A(z) :BC:(w)`, from
/// `:BC:(w) = oint_w dx/(x-w) B(x) C(w)` and the contractions of `A(z)`
/// with `B(x)` and with `C(w)`.
pub fn wick_left(
    engine: &Engine,
    a: &NormalForm,
    b: &NormalForm,
    c: &NormalForm,
) -> Result<SingularSeries, WickError> {
    let mut terms = Vec::new();
    // A(z) B(x) ~ X(x)/(z-x)^(i+1), then X(x) C(w) in full
    for i in 0..=top(engine, a, b) {
        let x = engine.residue_product(a, i, b)?;
        if x.is_zero() {
            continue;
        }
        for j in 0..=top(engine, &x, c) {
            let field = engine.residue_product(&x, j, c)?;
            if !field.is_zero() {
                terms.push(IntegrandTerm { field, zx: i + 1, xw: j + 2, zw: 0 });
            }
        }
        // regular part: only (x-w)^0 survives the extra 1/(x-w)
        let field = engine.residue_product(&x, -1, c)?;
        terms.push(IntegrandTerm { field, zx: i + 1, xw: 1, zw: 0 });
    }
    // A(z) C(w) ~ Z(w)/(z-w)^(i+1), then B(x) Z(w) in full
    for i in 0..=top(engine, a, c) {
        let z = engine.residue_product(a, i, c)?;
        if z.is_zero() {
            continue;
        }
        for j in 0..=top(engine, b, &z) {
            let field = engine.residue_product(b, j, &z)?;
            if !field.is_zero() {
                terms.push(IntegrandTerm { field, zx: 0, xw: j + 2, zw: i + 1 });
            }
        }
        for k in 0..=i {
            let field = engine.residue_product(b, -k - 1, &z)?;
            terms.push(IntegrandTerm { field, zx: 0, xw: 1 - k, zw: i + 1 });
        }
    }
    integrate(&terms)
}

/// Singular part of `:AB:(z) C(w)`, as `oint_w dx/(z-x) :AB:(x) C(w)` with
/// the singular part of `:AB:(x) C(w)` built from the contraction of `B`
/// with `C` (then `A` regular against it) and of `A` with `C` (then `B`
/// against it in full).
pub fn wick_right(
    engine: &Engine,
    a: &NormalForm,
    b: &NormalForm,
    c: &NormalForm,
) -> Result<SingularSeries, WickError> {
    let mut terms = Vec::new();
    for i in 0..=top(engine, b, c) {
        let y = engine.residue_product(b, i, c)?;
        if y.is_zero() {
            continue;
        }
        for j in 0..=i {
            let field = engine.residue_product(a, -j - 1, &y)?;
            terms.push(IntegrandTerm { field, zx: 1, xw: i + 1 - j, zw: 0 });
        }
    }
    for i in 0..=top(engine, a, c) {
        let z = engine.residue_product(a, i, c)?;
        if z.is_zero() {
            continue;
        }
        for j in 0..=top(engine, b, &z) {
            let field = engine.residue_product(b, j, &z)?;
            if !field.is_zero() {
                terms.push(IntegrandTerm { field, zx: 1, xw: i + j + 2, zw: 0 });
            }
        }
        for k in 0..=i {
            let field = engine.residue_product(b, -k - 1, &z)?;
            terms.push(IntegrandTerm { field, zx: 1, xw: i + 1 - k, zw: 0 });
        }
    }
    integrate(&terms)
}

/// Singular OPE `A(z) B(w)` from the engine's contractions.
pub fn ope(engine: &Engine, a: &NormalForm, b: &NormalForm) -> Result<SingularSeries, EngineError> {
    Ok(SingularSeries::from_contraction(engine.contraction(a, b)?))
}
