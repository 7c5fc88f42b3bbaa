//! Text, JSON and LaTeX output.
//!
//! Singular parts are listed from the highest pole down. The JSON layout is
//! versioned by [`SCHEMA`]; any change to it must bump the version.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use chiral_core::expr::render_monomial;
use chiral_core::{Algebra, Letter, Monomial, NormalForm, Scalar, SingularSeries};

use crate::session::{Indexed, Indices, ModuleKind, Report, SeriesKind};
use crate::syntax::{tokenize, Tok};

pub const SCHEMA: &str = "chiral-cli/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

pub fn render(report: &Report, alg: &Algebra, format: Format) -> String {
    match format {
        Format::Text => text(report, alg),
        Format::Json => {
            let mut v = json_body(report, alg);
            if let Value::Object(map) = &mut v {
                map.insert("schema".into(), json!(SCHEMA));
            }
            let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Latex => latex(report, alg),
    }
}

fn pole_text(p: u32) -> String {
    if p == 1 {
        "1/(z-w)".to_string()
    } else {
        format!("1/(z-w)^{p}")
    }
}

fn index_label(indices: &Indices) -> String {
    indices
        .iter()
        .map(|(v, x)| format!("{v} = {x}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Lines of each result, under an index label when there are indices.
fn labelled<T>(results: &[Indexed<T>], mut body: impl FnMut(&T) -> Vec<String>) -> String {
    let mut out = String::new();
    for r in results {
        let lines = body(&r.value);
        if r.indices.is_empty() {
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        } else {
            let _ = writeln!(out, "{}:", index_label(&r.indices));
            for l in lines {
                let _ = writeln!(out, "  {l}");
            }
        }
    }
    out
}

fn series_lines(s: &SingularSeries, alg: &Algebra) -> Vec<String> {
    if s.is_zero() {
        return vec!["0".to_string()];
    }
    s.poles
        .iter()
        .rev()
        .map(|(p, v)| format!("{}: {}", pole_text(*p), v.render(alg)))
        .collect()
}

fn module_name(m: ModuleKind) -> &'static str {
    match m {
        ModuleKind::Vacuum => "vacuum",
        ModuleKind::Verma => "verma",
    }
}

fn text(report: &Report, alg: &Algebra) -> String {
    match report {
        Report::Series { results, .. } => labelled(results, |s| series_lines(s, alg)),
        Report::Field { results, .. } => labelled(results, |nf| vec![nf.render(alg)]),
        Report::Borcherds { window, results, .. } => labelled(results, |r| {
            let mut lines = vec![format!(
                "{} instances in p {}..{}, q {}..{}, r {}..{}: {}",
                r.checked,
                window.p.start(),
                window.p.end(),
                window.q.start(),
                window.q.end(),
                window.r.start(),
                window.r.end(),
                if r.is_clean() {
                    "all hold".to_string()
                } else {
                    format!("{} violations", r.violations.len())
                }
            )];
            for v in &r.violations {
                lines.push(format!(
                    "(p, q, r) = ({}, {}, {}): lhs {} rhs {}",
                    v.p,
                    v.q,
                    v.r,
                    v.lhs.render(alg),
                    v.rhs.render(alg)
                ));
            }
            lines
        }),
        Report::Consistency { cutoff, report } => {
            let mut out = format!(
                "skew symmetry: {} checked, {} violations\n",
                report.skew_checked,
                report.skew_violations.len()
            );
            for v in &report.skew_violations {
                let _ = writeln!(
                    out,
                    "  {}_({}) {}: direct {} skew {}",
                    alg.generator_name(v.left),
                    v.pole,
                    alg.generator_name(v.right),
                    v.direct.render(alg),
                    v.skew.render(alg)
                );
            }
            let _ = writeln!(
                out,
                "borcherds identity (p, q, r in 0..{cutoff}): {} checked, {} violations",
                report.borcherds_checked,
                report.borcherds_violations.len()
            );
            for ((a, b, c), v) in &report.borcherds_violations {
                let _ = writeln!(
                    out,
                    "  {} {} {} at ({}, {}, {}): lhs {} rhs {}",
                    alg.generator_name(*a),
                    alg.generator_name(*b),
                    alg.generator_name(*c),
                    v.p,
                    v.q,
                    v.r,
                    v.lhs.render(alg),
                    v.rhs.render(alg)
                );
            }
            out.push_str(if report.is_consistent() {
                "consistent\n"
            } else {
                "inconsistent\n"
            });
            out
        }
        Report::Oracle {
            module,
            bindings,
            level,
            dims,
            results,
            ..
        } => {
            let b = bindings
                .iter()
                .map(|(n, v)| format!("{n} = {v}"))
                .collect::<Vec<_>>()
                .join(", ");
            let mut out = format!(
                "{} module{}{}, levels 0..{level}, dimensions {}\n",
                module_name(*module),
                if b.is_empty() { "" } else { " at " },
                b,
                dims.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
            );
            out.push_str(&labelled(results, |r| match &r.mismatch {
                None => vec![format!("agrees on {} (mode, state) pairs", r.checked)],
                Some(m) => vec![
                    format!("mismatch for mode {} on {}", m.n, m.state),
                    format!("normal form: {}", m.symbolic),
                    format!("expression: {}", m.direct),
                ],
            }));
            out
        }
        Report::Definition { name, value } => format!("{name} = {}\n", value.render(alg)),
        Report::Algebra { text } => text.clone(),
        Report::Script { steps } => {
            let mut out = String::new();
            for (line, r) in steps {
                let _ = writeln!(out, "> {line}");
                out.push_str(&text(r, alg));
            }
            out
        }
    }
}

fn nf_json(nf: &NormalForm, alg: &Algebra) -> Value {
    let terms: Vec<Value> = nf
        .iter()
        .map(|(m, c)| json!({ "coeff": c.render(alg.params()), "field": render_monomial(m, alg) }))
        .collect();
    json!({ "text": nf.render(alg), "terms": terms })
}

fn indices_json(indices: &Indices) -> Value {
    Value::Object(
        indices
            .iter()
            .map(|(v, x)| (v.clone(), Value::String(x.clone())))
            .collect::<Map<_, _>>(),
    )
}

fn results_json<T>(results: &[Indexed<T>], mut f: impl FnMut(&T) -> Value) -> Value {
    Value::Array(
        results
            .iter()
            .map(|r| {
                let mut v = f(&r.value);
                if let Value::Object(map) = &mut v {
                    map.insert("indices".into(), indices_json(&r.indices));
                }
                v
            })
            .collect(),
    )
}

fn json_body(report: &Report, alg: &Algebra) -> Value {
    match report {
        Report::Series { kind, args, results } => json!({
            "command": kind.command(),
            "args": args,
            "results": results_json(results, |s| {
                let poles: Vec<Value> = s
                    .poles
                    .iter()
                    .rev()
                    .map(|(p, v)| json!({ "order": p, "value": nf_json(v, alg) }))
                    .collect();
                json!({ "poles": poles })
            }),
        }),
        Report::Field { command, args, results } => json!({
            "command": command,
            "args": args,
            "results": results_json(results, |nf| {
                let weight = match nf.weight(alg) {
                    chiral_core::Weight::Of(w) => json!(w),
                    other => json!(other.to_string()),
                };
                json!({ "value": nf_json(nf, alg), "weight": weight })
            }),
        }),
        Report::Borcherds { args, window, results } => json!({
            "command": "check-borcherds",
            "args": args,
            "window": {
                "p": [window.p.start(), window.p.end()],
                "q": [window.q.start(), window.q.end()],
                "r": [window.r.start(), window.r.end()],
            },
            "results": results_json(results, |r| {
                let violations: Vec<Value> = r
                    .violations
                    .iter()
                    .map(|v| json!({
                        "p": v.p, "q": v.q, "r": v.r,
                        "tier": v.tier,
                        "lhs": nf_json(&v.lhs, alg),
                        "rhs": nf_json(&v.rhs, alg),
                    }))
                    .collect();
                json!({ "checked": r.checked, "holds": r.is_clean(), "violations": violations })
            }),
            "passed": report.passed(),
        }),
        Report::Consistency { cutoff, report: r } => json!({
            "command": "check-algebra",
            "cutoff": cutoff,
            "skew_checked": r.skew_checked,
            "skew_violations": r.skew_violations.iter().map(|v| json!({
                "left": alg.generator_name(v.left),
                "right": alg.generator_name(v.right),
                "pole": v.pole,
                "direct": nf_json(&v.direct, alg),
                "skew": nf_json(&v.skew, alg),
            })).collect::<Vec<_>>(),
            "borcherds_checked": r.borcherds_checked,
            "borcherds_violations": r.borcherds_violations.iter().map(|((a, b, c), v)| json!({
                "fields": [alg.generator_name(*a), alg.generator_name(*b), alg.generator_name(*c)],
                "p": v.p, "q": v.q, "r": v.r,
                "lhs": nf_json(&v.lhs, alg),
                "rhs": nf_json(&v.rhs, alg),
            })).collect::<Vec<_>>(),
            "passed": r.is_consistent(),
        }),
        Report::Oracle { args, module, bindings, level, dims, results } => json!({
            "command": "oracle-verify",
            "args": args,
            "module": module_name(*module),
            "bindings": bindings.iter().map(|(n, v)| (n.clone(), Value::String(v.clone()))).collect::<Map<_, _>>(),
            "level": level,
            "dims": dims,
            "results": results_json(results, |r| json!({
                "checked": r.checked,
                "agrees": r.agrees(),
                "mismatch": r.mismatch.as_ref().map(|m| json!({
                    "n": m.n, "state": m.state, "normal_form": m.symbolic, "expression": m.direct,
                })),
            })),
            "passed": report.passed(),
        }),
        Report::Definition { name, value } => json!({
            "command": "let",
            "name": name,
            "value": value.render(alg),
        }),
        Report::Algebra { text } => json!({ "command": "show-algebra", "algebra": text }),
        Report::Script { steps } => json!({
            "command": "run",
            "steps": steps.iter().map(|(line, r)| {
                let mut v = json_body(r, alg);
                if let Value::Object(map) = &mut v {
                    map.insert("line".into(), json!(line));
                }
                v
            }).collect::<Vec<_>>(),
            "passed": report.passed(),
        }),
    }
}

// ---- LaTeX ----

fn coeff_latex(s: &str) -> String {
    if !s.contains('(') {
        if let Some((a, b)) = s.split_once('/') {
            return format!("\\frac{{{a}}}{{{b}}}");
        }
    }
    s.replace("*i", " i")
}

fn poly_latex(p: &chiral_core::scalar::Poly, alg: &Algebra) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let names = alg.params().names();
    let mut out = String::new();
    for (idx, (e, c)) in p.terms().rev().enumerate() {
        let mono = e
            .entries()
            .map(|(v, k)| {
                let n = &names[v];
                if k == 1 {
                    n.clone()
                } else {
                    format!("{n}^{{{k}}}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        let cs = c.to_string();
        let (neg, abs) = match cs.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, cs),
        };
        let body = if mono.is_empty() {
            coeff_latex(&abs)
        } else if abs == "1" {
            mono
        } else {
            format!("{} {mono}", coeff_latex(&abs))
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

pub fn scalar_latex(s: &Scalar, alg: &Algebra) -> String {
    let num = poly_latex(s.numerator(), alg);
    if s.denominator().is_one() {
        num
    } else {
        format!("\\frac{{{num}}}{{{}}}", poly_latex(s.denominator(), alg))
    }
}

fn name_latex(name: &str) -> String {
    match name.split_once('^') {
        Some((base, sfx)) => format!("{base}^{{{sfx}}}"),
        None => name.to_string(),
    }
}

fn letter_latex(l: Letter, alg: &Algebra) -> String {
    let name = name_latex(alg.generator_name(l.gen));
    match l.deriv {
        0 => name,
        1 => format!("\\partial {name}"),
        j => format!("\\partial^{{({j})}} {name}"),
    }
}

fn monomial_latex(m: &Monomial, alg: &Algebra) -> String {
    match m.letters() {
        [] => String::new(),
        [l] => letter_latex(*l, alg),
        ls => format!(
            "({})",
            ls.iter().map(|l| letter_latex(*l, alg)).collect::<Vec<_>>().join(" ")
        ),
    }
}

pub fn nf_latex(nf: &NormalForm, alg: &Algebra) -> String {
    if nf.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in nf.iter().enumerate() {
        let mono = monomial_latex(m, alg);
        let (neg, c) = if c.is_negative_like() || (-c).is_one() {
            (true, -c)
        } else {
            (false, c.clone())
        };
        let body = if c.is_one() {
            if mono.is_empty() {
                "1".to_string()
            } else {
                mono
            }
        } else if mono.is_empty() || c.is_single_term() {
            format!("{} {mono}", scalar_latex(&c, alg)).trim_end().to_string()
        } else {
            format!("\\left({}\\right) {mono}", scalar_latex(&c, alg))
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

/// LaTeX for expression text as typed, index variables included.
pub fn expr_latex(text: &str) -> String {
    let Ok(toks) = tokenize(text) else {
        return format!("\\text{{{text}}}");
    };
    let mut out = String::new();
    let mut open_colons = 0usize;
    // brace depths that close a `sum` body
    let mut sums: Vec<(usize, bool)> = Vec::new();
    let mut braces = 0usize;
    let mut value_end = false;
    let mut k = 0;
    let at = |k: usize| toks.get(k).map(|t| &t.tok);
    while k < toks.len() {
        let tok = &toks[k].tok;
        let mut next_value_end = false;
        match tok {
            Tok::Ident(d) if d == "d" => {
                if at(k + 1) == Some(&Tok::Sym('^')) && at(k + 2) == Some(&Tok::Sym('(')) {
                    if let Some(Tok::Num(n)) = at(k + 3) {
                        let _ = write!(out, "\\partial^{{({n})}} ");
                        k += 5;
                        continue;
                    }
                }
                out.push_str("\\partial ");
            }
            Tok::Ident(s) if s == "sum" && at(k + 1) == Some(&Tok::Sym('(')) => {
                if let (Some(Tok::Ident(v)), Some(Tok::Sym(')')), Some(Tok::Sym('{'))) =
                    (at(k + 2), at(k + 3), at(k + 4))
                {
                    braces += 1;
                    let body_has_sum = toks[k + 5..]
                        .iter()
                        .take_while(|t| t.tok != Tok::Sym('}'))
                        .any(|t| matches!(t.tok, Tok::Sym('+') | Tok::Sym('-')));
                    sums.push((braces, body_has_sum));
                    let _ = write!(out, "\\sum_{{{v}}} ");
                    if body_has_sum {
                        out.push_str("\\left(");
                    }
                    k += 5;
                    value_end = false;
                    continue;
                }
                out.push_str(s);
            }
            Tok::Ident(x) => {
                if at(k + 1) == Some(&Tok::Sym('^')) {
                    if let Some(Tok::Num(s) | Tok::Ident(s)) = at(k + 2) {
                        let _ = write!(out, "{x}^{{{s}}}");
                        k += 3;
                        value_end = true;
                        continue;
                    }
                }
                out.push_str(x);
                next_value_end = true;
            }
            Tok::Num(n) => {
                out.push_str(n);
                next_value_end = true;
            }
            Tok::Sym(':') => {
                if value_end && open_colons > 0 {
                    open_colons -= 1;
                    out.push(')');
                    next_value_end = true;
                } else {
                    open_colons += 1;
                    out.push('(');
                }
            }
            Tok::Sym('_') => {
                out.push_str("_{");
                let mut j = k + 1;
                while j < toks.len() {
                    match &toks[j].tok {
                        Tok::Num(n) => out.push_str(n),
                        Tok::Sym(c) => out.push(*c),
                        Tok::Ident(i) => out.push_str(i),
                    }
                    if toks[j].tok == Tok::Sym(')') {
                        break;
                    }
                    j += 1;
                }
                out.push_str("} ");
                k = j + 1;
                value_end = false;
                continue;
            }
            Tok::Sym('{') => {
                braces += 1;
                out.push('{');
            }
            Tok::Sym('}') => {
                if let Some(&(depth, paren)) = sums.last() {
                    if depth == braces {
                        sums.pop();
                        braces -= 1;
                        if paren {
                            out.push_str("\\right)");
                        }
                        k += 1;
                        value_end = true;
                        continue;
                    }
                }
                braces = braces.saturating_sub(1);
                out.push('}');
            }
            Tok::Sym('*') => out.push(' '),
            Tok::Sym('+') => out.push_str(" + "),
            Tok::Sym('-') => out.push_str(" - "),
            Tok::Sym(')') => {
                out.push(')');
                next_value_end = true;
            }
            Tok::Sym(c) => out.push(*c),
        }
        if next_value_end && matches!(at(k + 1), Some(Tok::Ident(_)) | Some(Tok::Num(_))) {
            out.push(' ');
        }
        value_end = next_value_end;
        k += 1;
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn series_latex(lhs: &str, s: &SingularSeries, alg: &Algebra) -> String {
    if s.is_zero() {
        return format!("{lhs} \\sim 0");
    }
    let terms: Vec<String> = s
        .poles
        .iter()
        .rev()
        .map(|(p, v)| {
            let den = if *p == 1 {
                "z-w".to_string()
            } else {
                format!("(z-w)^{{{p}}}")
            };
            format!("\\frac{{{}}}{{{den}}}", nf_latex(v, alg))
        })
        .collect();
    format!("{lhs} \\sim {}", terms.join(" + "))
}

fn latex_labelled<T>(results: &[Indexed<T>], mut body: impl FnMut(&T) -> String) -> String {
    let mut out = String::new();
    for r in results {
        if !r.indices.is_empty() {
            let _ = write!(out, "{}:\\quad ", index_label(&r.indices));
        }
        out.push_str(&body(&r.value));
        out.push('\n');
    }
    out
}

fn latex(report: &Report, alg: &Algebra) -> String {
    match report {
        Report::Series { kind, args, results } => {
            let a: Vec<String> = args.iter().map(|x| expr_latex(x)).collect();
            let lhs = match kind {
                SeriesKind::Ope => format!("{}(z)\\,{}(w)", a[0], a[1]),
                SeriesKind::WickLeft => format!("{}(z)\\,({} {})(w)", a[0], a[1], a[2]),
                SeriesKind::WickRight => format!("({} {})(z)\\,{}(w)", a[0], a[1], a[2]),
            };
            latex_labelled(results, |s| series_latex(&lhs, s, alg))
        }
        Report::Field { command, args, results } => {
            let lhs = match *command {
                "rp" => format!("{}_{{({})}} {}", expr_latex(&args[0]), args[1], expr_latex(&args[2])),
                _ => expr_latex(&args[0]),
            };
            latex_labelled(results, |nf| format!("{lhs} = {}", nf_latex(nf, alg)))
        }
        Report::Definition { name, value } => {
            format!("{} := {}\n", name, expr_latex(&value.render(alg)))
        }
        Report::Script { steps } => {
            let mut out = String::new();
            for (line, r) in steps {
                let _ = writeln!(out, "% {line}");
                out.push_str(&latex(r, alg));
            }
            out
        }
        // check reports have no formula layout; keep them as comments
        other => text(other, alg)
            .lines()
            .map(|l| format!("% {l}\n"))
            .collect(),
    }
}
