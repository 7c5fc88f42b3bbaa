//! Parser for the expression grammar.
//!
//! ```text
//! expr    := ['-'] term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | postfix ['^' ['-'] int]
//! postfix := primary ('_' '(' int ')' primary)*
//! primary := int | 'i' | 'I' | param | generator | definition
//!          | 'd' ['^' '(' int ')'] primary
//!          | ':' primary primary+ ':'
//!          | '(' expr ')'
//!          | 'sum' '(' index ')' '{' expr '}'
//! ```
//!
//! Generator names may carry a `^` suffix (`J^1`). Inside `sum(b){...}` a
//! suffix that is the index (`J^b`) runs over every generator of the form
//! `J^<value>`. Scalars are rational functions in the algebra parameters;
//! a scalar standing where a field is expected means that multiple of `I`.
//!
//! Parsing is inverse to [`FieldExpr::render`] and [`NormalForm::render`]:
//! rendering a parsed rendering gives back the same text.

use std::collections::BTreeMap;
use std::fmt;

use chiral_core::{Algebra, FieldExpr, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            offset,
            message: message.into(),
        }
    }

    /// The same error at a position shifted by `base` bytes.
    pub fn shifted(mut self, base: usize) -> Self {
        self.offset += base;
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.offset + 1, self.message)
    }
}

impl std::error::Error for SyntaxError {}

type Result<T> = std::result::Result<T, SyntaxError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Num(text[start..i].to_string()),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                offset: start,
            });
        } else if ":(){}+-*/^_".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                offset: i,
            });
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or(c);
            return Err(SyntaxError::new(i, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

/// Names an expression may refer to beyond the algebra itself.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    /// Named expressions from earlier `let` statements.
    pub definitions: BTreeMap<String, FieldExpr>,
    /// Values of index variables, e.g. `a -> 1` makes `J^a` mean `J^1`.
    pub indices: BTreeMap<String, String>,
}

pub const RESERVED: [&str; 4] = ["I", "i", "d", "sum"];

/// Suffixes `s` such that `base^s` is a generator, in generator order.
pub fn family(alg: &Algebra, base: &str) -> Vec<String> {
    let prefix = format!("{base}^");
    alg.generators()
        .iter()
        .filter_map(|g| g.name.strip_prefix(&prefix).map(str::to_string))
        .collect()
}

/// Index variables of an expression and how they are bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexUse {
    /// Index of a `sum` wrapping the whole expression.
    pub outer_sum: Option<String>,
    /// Indices bound by some `sum` in the expression.
    pub bound: Vec<String>,
    /// Every index used as a generator suffix, with its generator family.
    pub used: BTreeMap<String, String>,
}

impl IndexUse {
    pub fn free(&self) -> impl Iterator<Item = (&String, &String)> {
        self.used.iter().filter(|(v, _)| !self.bound.contains(v))
    }
}

fn is_index_suffix(alg: &Algebra, scope: &Scope, base: &str, suffix: &str) -> bool {
    alg.generator_id(&format!("{base}^{suffix}")).is_none()
        && alg.params().index_of(suffix).is_none()
        && !scope.definitions.contains_key(suffix)
        && !family(alg, base).is_empty()
}

/// Scan for index variables without evaluating anything.
pub fn index_use(text: &str, alg: &Algebra, scope: &Scope) -> Result<IndexUse> {
    let toks = tokenize(text)?;
    let mut out = IndexUse::default();
    for w in toks.windows(3) {
        if let [Token { tok: Tok::Ident(base), .. }, Token { tok: Tok::Sym('^'), .. }, Token { tok: Tok::Ident(v), .. }] =
            w
        {
            if is_index_suffix(alg, scope, base, v) {
                out.used.entry(v.clone()).or_insert_with(|| base.clone());
            }
        }
        if let [Token { tok: Tok::Ident(s), .. }, Token { tok: Tok::Sym('('), .. }, Token { tok: Tok::Ident(v), .. }] =
            w
        {
            if s == "sum" && !out.bound.contains(v) {
                out.bound.push(v.clone());
            }
        }
    }
    if let Some(v) = outer_sum_body(&toks).map(|(v, _, _)| v) {
        out.outer_sum = Some(v);
    }
    Ok(out)
}

/// For `sum(v){ body }` spanning all tokens: the index and the body's token range.
fn outer_sum_body(toks: &[Token]) -> Option<(String, usize, usize)> {
    match toks {
        [Token { tok: Tok::Ident(s), .. }, Token { tok: Tok::Sym('('), .. }, Token { tok: Tok::Ident(v), .. }, Token { tok: Tok::Sym(')'), .. }, Token { tok: Tok::Sym('{'), .. }, ..]
            if s == "sum" =>
        {
            let close = matching_brace(toks, 4)?;
            (close == toks.len() - 1).then(|| (v.clone(), 5, close))
        }
        _ => None,
    }
}

fn matching_brace(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, t) in toks.iter().enumerate().skip(open) {
        match t.tok {
            Tok::Sym('{') => depth += 1,
            Tok::Sym('}') => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}

/// Parse an expression; a bare scalar becomes that multiple of `I`.
pub fn parse_expr(text: &str, alg: &Algebra, scope: &Scope) -> Result<FieldExpr> {
    parse_tokens(tokenize(text)?, text.len(), alg, scope)
}

/// Parse the body of an expression of the form `sum(v){ body }`.
pub fn parse_outer_sum_body(text: &str, alg: &Algebra, scope: &Scope) -> Result<FieldExpr> {
    let toks = tokenize(text)?;
    let (_, start, end) = outer_sum_body(&toks)
        .ok_or_else(|| SyntaxError::new(0, "expected `sum(index){ ... }`"))?;
    let end_offset = toks[end].offset;
    parse_tokens(toks[start..end].to_vec(), end_offset, alg, scope)
}

fn parse_tokens(toks: Vec<Token>, end: usize, alg: &Algebra, scope: &Scope) -> Result<FieldExpr> {
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        alg,
        scope,
        indices: scope.indices.clone(),
    };
    let value = p.expr()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(SyntaxError::new(t.offset, "unexpected input after expression"));
    }
    Ok(value.into_top())
}

/// Parse a scalar expression in the parameters of `alg`.
pub fn parse_scalar(text: &str, alg: &Algebra) -> Result<Scalar> {
    let scope = Scope::default();
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
        alg,
        scope: &scope,
        indices: BTreeMap::new(),
    };
    let value = p.expr()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(SyntaxError::new(t.offset, "unexpected input after expression"));
    }
    match value {
        Val::Scalar(s) => Ok(s),
        Val::Field(..) => Err(SyntaxError::new(0, "expected a scalar, found a field")),
    }
}

/// A field value and whether it was written in parentheses.
#[derive(Clone, Debug)]
enum Val {
    Scalar(Scalar),
    Field(FieldExpr, bool),
}

/// One summand: a scalar, or coefficient times a field.
enum Term {
    Scalar(Scalar),
    Field(Scalar, FieldExpr, bool),
}

struct Lin(Vec<Term>);

impl Lin {
    fn into_val(self, parenthesized: bool) -> Val {
        if self.0.iter().all(|t| matches!(t, Term::Scalar(_))) {
            let mut acc = Scalar::zero();
            for t in self.0 {
                if let Term::Scalar(s) = t {
                    acc = &acc + &s;
                }
            }
            return Val::Scalar(acc);
        }
        let mut terms: Vec<(Scalar, FieldExpr, bool)> = self
            .0
            .into_iter()
            .map(|t| match t {
                Term::Scalar(s) => (s, FieldExpr::Identity, false),
                Term::Field(c, e, p) => (c, e, p),
            })
            .collect();
        if terms.len() == 1 && terms[0].0.is_one() {
            let (c, e, was_paren) = terms.pop().expect("one term");
            // `(d T)` renders a derivative, `(T)` a one-term sum
            let collapse = !was_paren
                && (!parenthesized
                    || matches!(e, FieldExpr::Derivative(..))
                    || matches!(e, FieldExpr::Product(m, _, _) if m != -1));
            return if collapse {
                Val::Field(e, parenthesized)
            } else {
                Val::Field(FieldExpr::Sum(vec![(c, e)]), parenthesized)
            };
        }
        Val::Field(
            FieldExpr::Sum(terms.into_iter().map(|(c, e, _)| (c, e)).collect()),
            parenthesized,
        )
    }
}

impl Val {
    fn into_top(self) -> FieldExpr {
        match self {
            Val::Scalar(s) if s.is_zero() => FieldExpr::Sum(Vec::new()),
            Val::Scalar(s) => FieldExpr::Sum(vec![(s, FieldExpr::Identity)]),
            Val::Field(e, _) => e,
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    /// Offset reported for errors at the end of input.
    end: usize,
    alg: &'a Algebra,
    scope: &'a Scope,
    indices: BTreeMap<String, String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(SyntaxError::new(self.offset(), msg))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                let v: i64 = n
                    .parse()
                    .map_err(|_| SyntaxError::new(self.offset(), "integer out of range"))?;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn expr(&mut self) -> Result<Val> {
        Ok(self.lin()?.into_val(false))
    }

    fn lin(&mut self) -> Result<Lin> {
        let mut terms = Vec::new();
        let mut neg = self.eat('-');
        loop {
            let t = self.term()?;
            terms.push(if neg { negate(t) } else { t });
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                break;
            }
        }
        Ok(Lin(terms))
    }

    fn term(&mut self) -> Result<Term> {
        let mut coeff = Scalar::one();
        let mut field: Option<(FieldExpr, bool)> = None;
        let mut divide = false;
        loop {
            let at = self.offset();
            match self.factor()? {
                Val::Scalar(s) if divide => {
                    coeff = coeff
                        .checked_div(&s)
                        .map_err(|_| SyntaxError::new(at, "division by zero"))?;
                }
                Val::Scalar(s) => coeff = &coeff * &s,
                Val::Field(..) if divide => {
                    return Err(SyntaxError::new(at, "cannot divide by a field"));
                }
                Val::Field(e, p) => {
                    if field.is_some() {
                        return Err(SyntaxError::new(
                            at,
                            "fields cannot be multiplied; write `:A B:` for the normally ordered product",
                        ));
                    }
                    field = Some((e, p));
                }
            }
            if self.eat('*') {
                divide = false;
            } else if self.eat('/') {
                divide = true;
            } else {
                break;
            }
        }
        Ok(match field {
            Some((e, p)) => Term::Field(coeff, e, p),
            None => Term::Scalar(coeff),
        })
    }

    fn factor(&mut self) -> Result<Val> {
        if self.eat('-') {
            return Ok(match self.factor()? {
                Val::Scalar(s) => Val::Scalar(-&s),
                Val::Field(e, _) => Val::Field(FieldExpr::Sum(vec![(-&Scalar::one(), e)]), true),
            });
        }
        let v = self.postfix()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            let at = self.offset();
            self.pos += 1;
            let e = self.int()?;
            let Val::Scalar(s) = v else {
                return Err(SyntaxError::new(at, "only scalars can be raised to a power"));
            };
            let e = i32::try_from(e).map_err(|_| SyntaxError::new(at, "exponent out of range"))?;
            return s
                .pow(e)
                .map(Val::Scalar)
                .map_err(|_| SyntaxError::new(at, "division by zero"));
        }
        Ok(v)
    }

    fn postfix(&mut self) -> Result<Val> {
        let mut v = self.primary()?;
        while self.peek() == Some(&Tok::Sym('_')) {
            let at = self.offset();
            self.pos += 1;
            self.expect('(')?;
            let m = self.int()?;
            self.expect(')')?;
            let lhs = self.field_of(v, at)?;
            let at = self.offset();
            let rhs = self.primary()?;
            let rhs = self.field_of(rhs, at)?;
            v = Val::Field(FieldExpr::Product(m, Box::new(lhs), Box::new(rhs)), false);
        }
        Ok(v)
    }

    fn field_of(&self, v: Val, at: usize) -> Result<FieldExpr> {
        match v {
            Val::Field(e, _) => Ok(e),
            Val::Scalar(s) if s.is_one() => Ok(FieldExpr::Identity),
            Val::Scalar(s) if s.is_zero() => Ok(FieldExpr::Sum(Vec::new())),
            Val::Scalar(_) => Err(SyntaxError::new(
                at,
                "expected a field; write `c*I` for a multiple of the identity",
            )),
        }
    }

    fn primary(&mut self) -> Result<Val> {
        let at = self.offset();
        match self.peek().cloned() {
            None => self.err("unexpected end of input"),
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let s = Scalar::parse(&n, self.alg.params())
                    .map_err(|e| SyntaxError::new(at, e.to_string()))?;
                Ok(Val::Scalar(s))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let lin = self.lin()?;
                self.expect(')')?;
                Ok(lin.into_val(true))
            }
            Some(Tok::Sym(':')) => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(&Tok::Sym(':')) && items.len() >= 2 {
                        self.pos += 1;
                        break;
                    }
                    let at = self.offset();
                    let v = self.primary()?;
                    items.push(self.field_of(v, at)?);
                }
                let mut acc = items.pop().expect("at least two items");
                while let Some(a) = items.pop() {
                    acc = FieldExpr::Product(-1, Box::new(a), Box::new(acc));
                }
                Ok(Val::Field(acc, false))
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected `{c}`")),
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.ident(name, at)
            }
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Val> {
        match name.as_str() {
            "I" => return Ok(Val::Field(FieldExpr::Identity, false)),
            "i" => return Ok(Val::Scalar(Scalar::i())),
            "d" => {
                let mut j = 1;
                if self.eat('^') {
                    self.expect('(')?;
                    let o = self.offset();
                    j = u32::try_from(self.int()?)
                        .map_err(|_| SyntaxError::new(o, "derivative order must be nonnegative"))?;
                    self.expect(')')?;
                }
                let at = self.offset();
                let v = self.primary()?;
                let e = self.field_of(v, at)?;
                return Ok(Val::Field(FieldExpr::Derivative(j, Box::new(e)), false));
            }
            "sum" if self.peek() == Some(&Tok::Sym('(')) => return self.sum(),
            _ => {}
        }
        if let Some(s) = self.alg.param(&name) {
            return Ok(Val::Scalar(s));
        }
        if let Some(e) = self.scope.definitions.get(&name) {
            return Ok(Val::Field(e.clone(), false));
        }
        if self.peek() == Some(&Tok::Sym('^')) {
            let suffix = match self.peek_at(1) {
                Some(Tok::Num(s)) | Some(Tok::Ident(s)) => Some(s.clone()),
                _ => None,
            };
            if let Some(suffix) = suffix {
                let full = format!("{name}^{suffix}");
                if let Some(g) = self.alg.generator_id(&full) {
                    self.pos += 2;
                    return Ok(Val::Field(FieldExpr::Generator(g), false));
                }
                if let Some(value) = self.indices.get(&suffix) {
                    let resolved = format!("{name}^{value}");
                    let g = self.alg.generator_id(&resolved).ok_or_else(|| {
                        SyntaxError::new(at, format!("no generator `{resolved}`"))
                    })?;
                    self.pos += 2;
                    return Ok(Val::Field(FieldExpr::Generator(g), false));
                }
                if is_index_suffix(self.alg, self.scope, &name, &suffix)
                    && matches!(self.peek_at(1), Some(Tok::Ident(_)))
                {
                    return Err(SyntaxError::new(
                        self.toks[self.pos + 1].offset,
                        format!("index `{suffix}` is not bound"),
                    ));
                }
                if self.alg.generator_id(&name).is_none() {
                    return Err(SyntaxError::new(at, format!("unknown generator `{full}`")));
                }
            }
        }
        match self.alg.generator_id(&name) {
            Some(g) => Ok(Val::Field(FieldExpr::Generator(g), false)),
            None => Err(SyntaxError::new(
                at,
                format!("unknown generator or parameter `{name}`"),
            )),
        }
    }

    /// `sum(v){ body }`: the body once per value of `v`, added up.
    fn sum(&mut self) -> Result<Val> {
        self.expect('(')?;
        let at = self.offset();
        let var = match self.peek().cloned() {
            Some(Tok::Ident(v)) => v,
            _ => return self.err("expected an index name"),
        };
        if RESERVED.contains(&var.as_str())
            || self.alg.param(&var).is_some()
            || self.alg.generator_id(&var).is_some()
            || self.indices.contains_key(&var)
        {
            return Err(SyntaxError::new(at, format!("`{var}` cannot be used as an index")));
        }
        self.pos += 1;
        self.expect(')')?;
        let open = self.pos;
        if self.peek() != Some(&Tok::Sym('{')) {
            return self.err("expected `{`");
        }
        let close = matching_brace(&self.toks, open)
            .ok_or_else(|| SyntaxError::new(self.toks[open].offset, "unclosed `{`"))?;
        let base = self.toks[open..close].windows(3).find_map(|w| match w {
            [Token { tok: Tok::Ident(base), .. }, Token { tok: Tok::Sym('^'), .. }, Token { tok: Tok::Ident(v), .. }]
                if *v == var =>
            {
                Some(base.clone())
            }
            _ => None,
        });
        let values = base.map(|b| family(self.alg, &b)).unwrap_or_default();
        if values.is_empty() {
            return Err(SyntaxError::new(
                at,
                format!("index `{var}` is not used as a generator suffix"),
            ));
        }
        let mut terms = Vec::new();
        for v in values {
            self.indices.insert(var.clone(), v);
            self.pos = open + 1;
            terms.extend(self.lin()?.0);
            if self.pos != close {
                return self.err("expected `}`");
            }
        }
        self.indices.remove(&var);
        self.pos = close + 1;
        // flatten the copies into one sum
        let val = Lin(terms).into_val(true);
        Ok(match val {
            Val::Field(FieldExpr::Sum(ts), _) => Val::Field(flatten(ts), false),
            Val::Field(e, _) => Val::Field(e, false),
            other => other,
        })
    }
}

fn flatten(terms: Vec<(Scalar, FieldExpr)>) -> FieldExpr {
    let mut out = Vec::new();
    for (c, e) in terms {
        match e {
            FieldExpr::Sum(inner) => {
                out.extend(inner.into_iter().map(|(k, x)| (&c * &k, x)));
            }
            e => out.push((c, e)),
        }
    }
    FieldExpr::Sum(out)
}

fn negate(t: Term) -> Term {
    match t {
        Term::Scalar(s) => Term::Scalar(-&s),
        Term::Field(c, e, p) => Term::Field(-&c, e, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chiral_core::algebra::presets;
    use chiral_core::{Engine, NormalForm};

    fn roundtrip(alg: &Algebra, text: &str) {
        let e = parse_expr(text, alg, &Scope::default()).unwrap();
        assert_eq!(e.render(alg), text);
    }

    #[test]
    fn renders_back() {
        let vir = presets::virasoro();
        for t in [
            "T",
            "d T",
            "d^(3) T",
            ":T (d T):",
            ":T T T:",
            "T_(2) T",
            "(T_(1) T)_(0) T",
            "2*T + 1/2*c*I - :(d T) T:",
            "(c + 2)*T",
            "-T",
            "(d T)",
            "(T)",
            "3*(T)",
            "d (d T)",
            ":(:T T:) T:",
            "0*T",
            "c^2*I",
        ] {
            roundtrip(&vir, t);
        }
        let su2 = presets::su2();
        for t in ["J^1", "i*J^3", "3*k/(k + 2)*J^2", ":J^1 J^2:", "(1 + 2*i)*k*J^1"] {
            roundtrip(&su2, t);
        }
    }

    #[test]
    fn normal_forms_read_back() {
        let vir = presets::virasoro();
        let engine = Engine::new(&vir);
        let t = vir.field("T").unwrap();
        let tt = engine.nop(&t, &t).unwrap();
        for (_, v) in engine.contraction(&tt, &t).unwrap() {
            let e = parse_expr(&v.render(&vir), &vir, &Scope::default()).unwrap();
            assert_eq!(engine.normalize(&e).unwrap(), v);
        }
    }

    #[test]
    fn lemma_normal_form() {
        let vir = presets::virasoro();
        let e = parse_expr(":T d T: - :d T T:", &vir, &Scope::default()).unwrap();
        let nf = Engine::new(&vir).normalize(&e).unwrap();
        assert_eq!(nf.render(&vir), "d^(3) T");
    }

    #[test]
    fn sums_over_an_index() {
        let su2 = presets::su2();
        let e = parse_expr("sum(b){:J^b J^b:}", &su2, &Scope::default()).unwrap();
        assert_eq!(e.render(&su2), ":J^1 J^1: + :J^2 J^2: + :J^3 J^3:");
        let mut scope = Scope::default();
        scope.indices.insert("a".into(), "2".into());
        let e = parse_expr("J^a", &su2, &scope).unwrap();
        assert_eq!(e.render(&su2), "J^2");
    }

    #[test]
    fn index_scan() {
        let su2 = presets::su2();
        let u = index_use("sum(b){J^b}", &su2, &Scope::default()).unwrap();
        assert_eq!(u.outer_sum.as_deref(), Some("b"));
        assert_eq!(u.free().count(), 0);
        let u = index_use(":J^a J^b:", &su2, &Scope::default()).unwrap();
        assert_eq!(u.free().map(|(v, _)| v.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn scalars_become_identity_multiples() {
        let vir = presets::virasoro();
        let e = parse_expr("c/2", &vir, &Scope::default()).unwrap();
        let nf = Engine::new(&vir).normalize(&e).unwrap();
        assert_eq!(nf.render(&vir), "1/2*c*I");
        assert_eq!(
            Engine::new(&vir).normalize(&parse_expr("0", &vir, &Scope::default()).unwrap()).unwrap(),
            NormalForm::zero()
        );
    }

    #[test]
    fn errors_point_at_the_problem() {
        let vir = presets::virasoro();
        let s = Scope::default();
        let err = parse_expr("2*X", &vir, &s).unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(parse_expr("T*T", &vir, &s).unwrap_err().message.contains(":A B:"));
        assert_eq!(parse_expr("T +", &vir, &s).unwrap_err().offset, 3);
        assert!(parse_expr("T / T", &vir, &s).is_err());
        let su2 = presets::su2();
        let err = parse_expr("J^a", &su2, &s).unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(err.message.contains("not bound"));
    }
}
