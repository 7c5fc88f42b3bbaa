//! Algebra definition files.
//!
//! One statement per line, `#` starts a comment:
//!
//! ```text
//! param c                                   # one or more parameter names
//! field T weight 2                          # a generator and its weight
//! ope T T { 3: c/2*I ; 1: 2*T ; 0: d T }    # pole: value, separated by ; or newlines
//! lie su2 level k metric 2                # current algebra shorthand
//! ```
//!
//! OPE values are written in normal form: linear combinations of `I`,
//! `d^(j) G` and normally ordered words `:A B ...:` whose letters are in
//! standard order. Pairs `B A` missing while `A B` is given follow from skew
//! symmetry. `lie` declares a whole algebra and cannot be combined with
//! `field` or `ope`. Its optional `metric m` records the Killing form
//! normalization `g_(ab) = m delta_(ab)`; su2 is defined for `m = 2` only.

use std::fmt;
use std::ops::Range;

use chiral_core::algebra::presets;
use chiral_core::{
    Algebra, AlgebraError, FieldExpr, GeneratorDecl, Letter, Monomial, NormalForm, OpeEntry,
};

use crate::syntax::{self, Scope, RESERVED};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for DslError {}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Scanner<'a> {
    /// Source with comments blanked out, so offsets match the original.
    src: String,
    original: &'a str,
    pos: usize,
}

type Result<T> = std::result::Result<T, DslError>;

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        let mut src = String::with_capacity(text.len());
        let mut in_comment = false;
        for c in text.chars() {
            if c == '#' {
                in_comment = true;
            }
            if c == '\n' {
                in_comment = false;
            }
            if in_comment {
                src.extend(std::iter::repeat_n(' ', c.len_utf8()));
            } else {
                src.push(c);
            }
        }
        Scanner {
            src,
            original: text,
            pos: 0,
        }
    }

    fn make_error(&self, offset: usize, message: impl Into<String>) -> DslError {
        let (line, col) = line_col(self.original, offset);
        DslError {
            line,
            col,
            message: message.into(),
        }
    }

    fn error<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(self.make_error(offset, message))
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_blank(&mut self) {
        while self.peek().is_some_and(|c| c == ' ' || c == '\t' || c == '\r') {
            self.pos += 1;
        }
    }

    fn skip_all(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().map_or(1, char::len_utf8);
        }
    }

    /// A word on the current line: letters and digits, plus an optional `^suffix`.
    fn word(&mut self, what: &str) -> Result<(String, usize)> {
        self.skip_blank();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_alphanumeric() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'^' && end > start {
            let mut k = end + 1;
            while k < bytes.len() && bytes[k].is_ascii_alphanumeric() {
                k += 1;
            }
            if k > end + 1 {
                end = k;
            }
        }
        if end == start {
            return self.error(start, format!("expected {what}"));
        }
        self.pos = end;
        Ok((self.src[start..end].to_string(), start))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (w, at) = self.word(&format!("`{kw}`"))?;
        if w == kw {
            Ok(())
        } else {
            self.error(at, format!("expected `{kw}`, found `{w}`"))
        }
    }

    fn number(&mut self, what: &str) -> Result<(u32, usize)> {
        let (w, at) = self.word(what)?;
        match w.parse() {
            Ok(n) => Ok((n, at)),
            Err(_) => self.error(at, format!("expected {what}, found `{w}`")),
        }
    }

    fn at_line_end(&mut self) -> bool {
        self.skip_blank();
        matches!(self.peek(), None | Some('\n'))
    }

    fn end_statement(&mut self) -> Result<()> {
        if self.at_line_end() {
            Ok(())
        } else {
            self.error(self.pos, "unexpected text at end of statement")
        }
    }
}

fn check_name(sc: &Scanner, name: &str, at: usize) -> Result<()> {
    if RESERVED.contains(&name) {
        return sc.error(at, format!("`{name}` is reserved"));
    }
    if !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
        return sc.error(at, format!("`{name}` must start with a letter"));
    }
    Ok(())
}

struct OpeStatement {
    left: (String, usize),
    right: (String, usize),
    start: usize,
    entries: Vec<EntrySource>,
}

struct EntrySource {
    pole: u32,
    /// Byte range of the value text.
    value: Range<usize>,
    start: usize,
}

struct LieStatement {
    name: (String, usize),
    level: (String, usize),
    metric: Option<(u32, usize)>,
}

/// Parse an algebra definition file.
pub fn parse_algebra(text: &str) -> Result<Algebra> {
    let mut sc = Scanner::new(text);
    let mut params: Vec<(String, usize)> = Vec::new();
    let mut fields: Vec<(GeneratorDecl, usize)> = Vec::new();
    let mut opes: Vec<OpeStatement> = Vec::new();
    let mut lie: Option<LieStatement> = None;

    loop {
        sc.skip_all();
        if sc.peek().is_none() {
            break;
        }
        let (kw, at) = sc.word("a statement")?;
        match kw.as_str() {
            "param" => {
                loop {
                    let (name, p) = sc.word("a parameter name")?;
                    check_name(&sc, &name, p)?;
                    if params.iter().any(|(n, _)| *n == name) {
                        return sc.error(p, format!("duplicate parameter `{name}`"));
                    }
                    params.push((name, p));
                    sc.skip_blank();
                    if sc.peek() == Some(',') {
                        sc.pos += 1;
                    }
                    if sc.at_line_end() {
                        break;
                    }
                }
            }
            "field" => {
                let (name, p) = sc.word("a field name")?;
                check_name(&sc, &name, p)?;
                if fields.iter().any(|(g, _)| g.name == name) {
                    return sc.error(p, format!("duplicate field `{name}`"));
                }
                sc.keyword("weight")?;
                let (w, wat) = sc.number("a weight")?;
                if w < 1 {
                    return sc.error(wat, "weights must be at least 1");
                }
                fields.push((GeneratorDecl::new(name, w), p));
                sc.end_statement()?;
            }
            "ope" => {
                let left = sc.word("a field name")?;
                let right = sc.word("a field name")?;
                sc.skip_blank();
                if sc.peek() != Some('{') {
                    return sc.error(sc.pos, "expected `{`");
                }
                let open = sc.pos;
                let entries = ope_body(&mut sc, open)?;
                opes.push(OpeStatement {
                    left,
                    right,
                    start: at,
                    entries,
                });
                sc.end_statement()?;
            }
            "lie" => {
                if lie.is_some() {
                    return sc.error(at, "only one `lie` statement is allowed");
                }
                let name = sc.word("a Lie algebra name")?;
                sc.keyword("level")?;
                let level = sc.word("a level parameter")?;
                check_name(&sc, &level.0, level.1)?;
                let mut metric = None;
                if !sc.at_line_end() {
                    sc.keyword("metric")?;
                    metric = Some(sc.number("a metric normalization")?);
                }
                sc.end_statement()?;
                lie = Some(LieStatement { name, level, metric });
            }
            other => return sc.error(at, format!("unknown statement `{other}`")),
        }
    }

    if let Some(l) = lie {
        return lie_algebra(&sc, l, &params, &fields, &opes);
    }

    let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
    for (g, at) in &fields {
        if names.contains(&g.name) {
            return sc.error(*at, format!("`{}` is already a parameter", g.name));
        }
    }
    let gens: Vec<GeneratorDecl> = fields.iter().map(|(g, _)| g.clone()).collect();
    // generator names and parameters only, for parsing the values
    let names_only = Algebra::define(names.clone(), gens.clone(), Vec::new())
        .map_err(|e| sc.make_error(0, e.to_string()))?;

    let mut entries = Vec::new();
    let mut spans = Vec::new();
    for ope in &opes {
        for (name, at) in [&ope.left, &ope.right] {
            if names_only.generator_id(name).is_none() {
                return sc.error(*at, format!("unknown field `{name}`"));
            }
        }
        for e in &ope.entries {
            let src = &sc.src[e.value.clone()];
            let expr = syntax::parse_expr(src, &names_only, &Scope::default()).map_err(|err| {
                sc.make_error(e.value.start + err.offset, err.message)
            })?;
            let Some(value) = structural_normal_form(&expr) else {
                return sc.error(
                    e.value.start + leading_space(src),
                    "OPE values must be in normal form: combinations of I, d^(j) G and :A B ...: in standard order",
                );
            };
            entries.push(OpeEntry::new(&ope.left.0, &ope.right.0, e.pole, value));
            spans.push(e.start);
        }
        if ope.entries.is_empty() {
            entries.push(OpeEntry::new(&ope.left.0, &ope.right.0, 0, NormalForm::zero()));
            spans.push(ope.start);
        }
    }
    let keys: Vec<(String, String, u32)> = entries
        .iter()
        .map(|e| (e.left.clone(), e.right.clone(), e.pole))
        .collect();
    // offset of the nth entry `left right pole`
    let entry_at = |left: &str, right: &str, pole: u32, nth: usize| {
        keys.iter()
            .zip(&spans)
            .filter(|((l, r, p), _)| l == left && r == right && *p == pole)
            .nth(nth)
            .map_or(0, |(_, entry)| *entry)
    };
    Algebra::define(names, gens, entries).map_err(|err| {
        let at = match &err {
            AlgebraError::DuplicateEntry { left, right, pole } => entry_at(left, right, *pole, 1),
            AlgebraError::WeightMismatch {
                left, right, pole, ..
            } => entry_at(left, right, *pole, 0),
            _ => 0,
        };
        sc.make_error(at, err.to_string())
    })
}

fn leading_space(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

/// Entries of `{ pole: value ; ... }`; leaves the scanner after the `}`.
fn ope_body(sc: &mut Scanner, open: usize) -> Result<Vec<EntrySource>> {
    let bytes = sc.src.as_bytes();
    let mut depth = 0i32;
    let mut close = None;
    let mut cuts = vec![open + 1];
    for (k, &b) in bytes.iter().enumerate().skip(open) {
        match b {
            b'{' | b'(' => depth += 1,
            b'}' | b')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(k);
                    break;
                }
            }
            b';' | b'\n' if depth == 1 => cuts.push(k + 1),
            _ => {}
        }
    }
    let Some(close) = close else {
        return sc.error(open, "unclosed `{`");
    };
    cuts.push(close + 1);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1] - 1);
        let chunk = &sc.src[s..e];
        if chunk.trim().is_empty() {
            continue;
        }
        let start = s + leading_space(chunk);
        let digits = sc.src[start..e]
            .bytes()
            .take_while(u8::is_ascii_digit)
            .count();
        if digits == 0 {
            return sc.error(start, "expected a pole order");
        }
        let pole: u32 = match sc.src[start..start + digits].parse() {
            Ok(p) => p,
            Err(_) => return sc.error(start, "pole order out of range"),
        };
        let after = start + digits;
        let colon = after + leading_space(&sc.src[after..e]);
        if sc.src.as_bytes().get(colon) != Some(&b':') || colon >= e {
            return sc.error(colon, "expected `:` after the pole order");
        }
        if sc.src[colon + 1..e].trim().is_empty() {
            return sc.error(colon + 1, "expected a value");
        }
        out.push(EntrySource {
            pole,
            value: colon + 1..e,
            start,
        });
    }
    sc.pos = close + 1;
    Ok(out)
}

fn lie_algebra(
    sc: &Scanner,
    l: LieStatement,
    params: &[(String, usize)],
    fields: &[(GeneratorDecl, usize)],
    opes: &[OpeStatement],
) -> Result<Algebra> {
    if let Some((_, p)) = fields.first() {
        return sc.error(*p, "`field` cannot be combined with `lie`");
    }
    if let Some(o) = opes.first() {
        return sc.error(o.start, "`ope` cannot be combined with `lie`");
    }
    if let Some((name, p)) = params.iter().find(|(n, _)| *n != l.level.0) {
        return sc.error(*p, format!("parameter `{name}` is not used by `lie`"));
    }
    match l.name.0.as_str() {
        "su2" => match l.metric {
            Some((m, at)) if m != 2 => sc.error(
                at,
                format!("su2 uses metric 2 (g_(ab) = 2 delta_(ab)), not {m}"),
            ),
            _ => Ok(presets::su2_with_level(&l.level.0)),
        },
        other => sc.error(l.name.1, format!("unknown Lie algebra `{other}`; supported: su2")),
    }
}

/// Read a value that is already a combination of standard monomials.
pub fn structural_normal_form(e: &FieldExpr) -> Option<NormalForm> {
    match e {
        FieldExpr::Identity => Some(NormalForm::identity()),
        FieldExpr::Sum(terms) => {
            let mut out = NormalForm::zero();
            for (c, t) in terms {
                out.add_scaled(c, &structural_normal_form(t)?);
            }
            Some(out)
        }
        FieldExpr::Product(-1, a, b) => {
            let first = letter(a)?;
            let rest = structural_normal_form(b)?;
            let mut it = rest.iter();
            let (m, c) = it.next()?;
            if it.next().is_some() || !c.is_one() {
                return None;
            }
            let mut word = vec![first];
            word.extend_from_slice(m.letters());
            Monomial::from_sorted(word).map(NormalForm::monomial)
        }
        _ => letter(e).map(NormalForm::letter),
    }
}

fn letter(e: &FieldExpr) -> Option<Letter> {
    match e {
        FieldExpr::Generator(g) => Some(Letter::new(*g, 0)),
        FieldExpr::Derivative(j, inner) => match **inner {
            FieldExpr::Generator(g) => Some(Letter::new(g, *j)),
            _ => None,
        },
        _ => None,
    }
}

/// Definition file text for an algebra; [`parse_algebra`] reads it back.
pub fn render_algebra(alg: &Algebra) -> String {
    if let Some(lie) = alg.lie_data() {
        if *alg == presets::su2_with_level(&lie.level_param) {
            return format!("lie su2 level {} metric {}\n", lie.level_param, lie.metric);
        }
    }
    let mut out = String::new();
    if !alg.params().is_empty() {
        out.push_str(&format!("param {}\n", alg.params().names().join(" ")));
    }
    for g in alg.generators() {
        out.push_str(&format!("field {} weight {}\n", g.name, g.weight));
    }
    for (a, b) in alg.declared_pairs() {
        let count = alg.table().pole_count(a, b);
        let entries: Vec<String> = (0..count)
            .rev()
            .filter_map(|p| {
                alg.table()
                    .get(a, b, p as u32)
                    .map(|v| format!("{p}: {}", v.render(alg)))
            })
            .collect();
        let body = if entries.is_empty() {
            "0: 0".to_string()
        } else {
            entries.join(" ; ")
        };
        out.push_str(&format!(
            "ope {} {} {{ {body} }}\n",
            alg.generator_name(a),
            alg.generator_name(b)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const VIRASORO: &str = "# Virasoro algebra
param c
field T weight 2
ope T T { 3: c/2*I ; 1: 2*T ; 0: d T }
";

    #[test]
    fn virasoro_file_is_the_preset() {
        assert_eq!(parse_algebra(VIRASORO).unwrap(), presets::virasoro());
    }

    #[test]
    fn lie_shorthand_is_the_preset() {
        assert_eq!(parse_algebra("lie su2 level k\n").unwrap(), presets::su2());
        assert_eq!(parse_algebra("param k\nlie su2 level k metric 2").unwrap(), presets::su2());
    }

    #[test]
    fn undeclared_field_in_value() {
        let err = parse_algebra("param c\nfield T weight 2\nope T T { 1: 2*X }\n").unwrap_err();
        assert_eq!((err.line, err.col), (3, 16));
        assert!(err.message.contains("`X`"), "{err}");
    }

    #[test]
    fn multi_line_body_and_comments() {
        let text = "param c\nfield T weight 2\nope T T {\n  3: c/2*I   # central term\n  1: 2*T\n  0: d T\n}\n";
        assert_eq!(parse_algebra(text).unwrap(), presets::virasoro());
    }

    #[test]
    fn renders_back() {
        let vir = presets::virasoro();
        let text = render_algebra(&vir);
        assert_eq!(text, "param c\nfield T weight 2\nope T T { 3: 1/2*c*I ; 1: 2*T ; 0: d T }\n");
        assert_eq!(parse_algebra(&text).unwrap(), vir);
        assert_eq!(render_algebra(&presets::su2()), "lie su2 level k metric 2\n");
    }

    #[test]
    fn error_positions() {
        let cases = [
            ("field T weight 2\nfoo", (2, 1)),
            ("field T weigth 2", (1, 9)),
            ("field T weight 2\nope T T { 1: 2*T ; 1: 2*T }", (2, 20)),
            ("field T weight 2\nope T T { 2: T }", (2, 11)),
            ("field T weight 2\nope T U { 1: 2*T }", (2, 7)),
            ("field T weight 2\nope T T { 1 2*T }", (2, 13)),
            ("field T weight 2\nope T T { 0: :T d T: }", (2, 14)),
            ("lie e8 level k", (1, 5)),
            ("field d weight 1", (1, 7)),
        ];
        for (text, pos) in cases {
            let err = parse_algebra(text).unwrap_err();
            assert_eq!((err.line, err.col), pos, "{text}: {err}");
        }
    }
}
