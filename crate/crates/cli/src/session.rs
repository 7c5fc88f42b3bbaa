//! Query evaluation against one algebra.
//!
//! An argument of the form `sum(b){...}` whose index also appears in another
//! argument is summed outside the whole query, so
//! `wick-right "sum(b){J^b}" "J^b" "J^a"` means `sum_b wick-right(J^b, J^b, J^a)`.
//! Indices left free (`a` above) are enumerated, one result per value.

use std::collections::BTreeMap;

use chiral_core::borcherds::check_borcherds;
use chiral_core::oracle::HighestWeight;
use chiral_core::wick::{self, WickError};
use chiral_core::{
    Algebra, AlgebraError, BorcherdsReport, Engine, EngineError, FieldExpr, GaussRat,
    GradedModule, NormalForm, OracleError, ParamSpace, Scalar, SingularSeries, VerifyReport,
    Window,
};
use chiral_core::algebra::ConsistencyReport;

use crate::syntax::{self, family, Scope, RESERVED};
use crate::CliError;

/// Assignment of index variables, in variable order.
/// Index assignment and the argument tuples to add up under it.
type Expansion = (Indices, Vec<Vec<FieldExpr>>);

pub type Indices = Vec<(String, String)>;

#[derive(Clone, Debug)]
pub struct Indexed<T> {
    pub indices: Indices,
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Ope,
    WickLeft,
    WickRight,
}

impl SeriesKind {
    pub fn command(self) -> &'static str {
        match self {
            SeriesKind::Ope => "ope",
            SeriesKind::WickLeft => "wick-left",
            SeriesKind::WickRight => "wick-right",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModuleKind {
    Vacuum,
    Verma,
}

/// Result of one command, before rendering.
#[derive(Clone, Debug)]
pub enum Report {
    Series {
        kind: SeriesKind,
        args: Vec<String>,
        results: Vec<Indexed<SingularSeries>>,
    },
    Field {
        command: &'static str,
        args: Vec<String>,
        results: Vec<Indexed<NormalForm>>,
    },
    Borcherds {
        args: Vec<String>,
        window: Window,
        results: Vec<Indexed<BorcherdsReport>>,
    },
    Consistency {
        cutoff: u32,
        report: ConsistencyReport,
    },
    Oracle {
        args: Vec<String>,
        module: ModuleKind,
        bindings: Vec<(String, String)>,
        level: u32,
        dims: Vec<usize>,
        results: Vec<Indexed<VerifyReport>>,
    },
    Definition {
        name: String,
        value: FieldExpr,
    },
    Algebra {
        text: String,
    },
    Script {
        steps: Vec<(String, Report)>,
    },
}

impl Report {
    /// False when a check found a violation.
    pub fn passed(&self) -> bool {
        match self {
            Report::Borcherds { results, .. } => results.iter().all(|r| r.value.is_clean()),
            Report::Consistency { report, .. } => report.is_consistent(),
            Report::Oracle { results, .. } => results.iter().all(|r| r.value.agrees()),
            Report::Script { steps } => steps.iter().all(|(_, r)| r.passed()),
            _ => true,
        }
    }
}

/// Oracle options.
#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub bindings: Vec<(String, String)>,
    pub level: u32,
    pub module: ModuleKind,
    /// Zero-mode eigenvalues on the Verma highest-weight vector.
    pub highest: Vec<(String, String)>,
}

pub struct Session {
    alg: Algebra,
    scope: Scope,
    budget: u64,
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<WickError> for CliError {
    fn from(e: WickError) -> Self {
        match e {
            WickError::Engine(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Engine(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn add_series(acc: &mut SingularSeries, s: &SingularSeries) {
    for (p, v) in &s.poles {
        acc.add(*p, &Scalar::one(), v);
    }
}

impl Session {
    pub fn new(alg: Algebra, budget: u64) -> Self {
        Session {
            alg,
            scope: Scope::default(),
            budget,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    fn engine(&self) -> Engine<'_> {
        Engine::with_budget(&self.alg, self.budget)
    }

    pub fn parse(&self, text: &str) -> Result<FieldExpr, CliError> {
        syntax::parse_expr(text, &self.alg, &self.scope).map_err(|e| CliError::syntax(text, e))
    }

    /// Parse the arguments once per index assignment. Each entry holds the
    /// free-index values and the argument tuples to add up.
    fn expand(&self, args: &[String], lift: bool) -> Result<Vec<Expansion>, CliError> {
        let uses = args
            .iter()
            .map(|a| syntax::index_use(a, &self.alg, &self.scope).map_err(|e| CliError::syntax(a, e)))
            .collect::<Result<Vec<_>, _>>()?;
        // lifted index -> (argument it is stripped from, family)
        let mut lifted: BTreeMap<String, (usize, String)> = BTreeMap::new();
        if lift {
            for (i, u) in uses.iter().enumerate() {
                let Some(v) = &u.outer_sum else { continue };
                let elsewhere = uses
                    .iter()
                    .enumerate()
                    .any(|(j, w)| j != i && w.free().any(|(x, _)| x == v));
                if elsewhere && !lifted.contains_key(v) {
                    if let Some(fam) = u.used.get(v) {
                        lifted.insert(v.clone(), (i, fam.clone()));
                    }
                }
            }
        }
        let mut free: BTreeMap<String, String> = BTreeMap::new();
        for u in &uses {
            for (v, fam) in u.free() {
                if !lifted.contains_key(v) {
                    free.entry(v.clone()).or_insert_with(|| fam.clone());
                }
            }
        }
        let free_values: Vec<(String, Vec<String>)> = free
            .into_iter()
            .map(|(v, fam)| (v, family(&self.alg, &fam)))
            .collect();
        let lifted_values: Vec<(String, Vec<String>)> = lifted
            .iter()
            .map(|(v, (_, fam))| (v.clone(), family(&self.alg, fam)))
            .collect();
        let stripped: Vec<bool> = (0..args.len())
            .map(|i| lifted.values().any(|(k, _)| *k == i))
            .collect();

        let mut out = Vec::new();
        for assignment in cartesian(&free_values) {
            let mut tuples = Vec::new();
            for inner in cartesian(&lifted_values) {
                let mut scope = self.scope.clone();
                scope.indices = assignment.iter().chain(&inner).cloned().collect();
                let mut tuple = Vec::with_capacity(args.len());
                for (a, strip) in args.iter().zip(&stripped) {
                    let e = if *strip {
                        syntax::parse_outer_sum_body(a, &self.alg, &scope)
                    } else {
                        syntax::parse_expr(a, &self.alg, &scope)
                    }
                    .map_err(|e| CliError::syntax(a, e))?;
                    tuple.push(e);
                }
                tuples.push(tuple);
            }
            out.push((assignment, tuples));
        }
        Ok(out)
    }

    pub fn series(&self, kind: SeriesKind, args: &[String]) -> Result<Report, CliError> {
        let engine = self.engine();
        let mut results = Vec::new();
        for (indices, tuples) in self.expand(args, true)? {
            let mut acc = SingularSeries::default();
            for t in tuples {
                let nfs = t
                    .iter()
                    .map(|e| engine.normalize(e))
                    .collect::<Result<Vec<_>, _>>()?;
                let s = match kind {
                    SeriesKind::Ope => wick::ope(&engine, &nfs[0], &nfs[1])?,
                    SeriesKind::WickLeft => wick::wick_left(&engine, &nfs[0], &nfs[1], &nfs[2])?,
                    SeriesKind::WickRight => wick::wick_right(&engine, &nfs[0], &nfs[1], &nfs[2])?,
                };
                add_series(&mut acc, &s);
            }
            results.push(Indexed { indices, value: acc });
        }
        Ok(Report::Series {
            kind,
            args: args.to_vec(),
            results,
        })
    }

    pub fn normal_form(&self, arg: &str) -> Result<Report, CliError> {
        let engine = self.engine();
        let args = vec![arg.to_string()];
        let mut results = Vec::new();
        for (indices, tuples) in self.expand(&args, true)? {
            let mut acc = NormalForm::zero();
            for t in tuples {
                acc = acc.add(&engine.normalize(&t[0])?);
            }
            results.push(Indexed { indices, value: acc });
        }
        Ok(Report::Field {
            command: "nf",
            args,
            results,
        })
    }

    pub fn residue_product(&self, a: &str, m: i64, b: &str) -> Result<Report, CliError> {
        let engine = self.engine();
        let args = vec![a.to_string(), b.to_string()];
        let mut results = Vec::new();
        for (indices, tuples) in self.expand(&args, true)? {
            let mut acc = NormalForm::zero();
            for t in tuples {
                let (x, y) = (engine.normalize(&t[0])?, engine.normalize(&t[1])?);
                acc = acc.add(&engine.residue_product(&x, m, &y)?);
            }
            results.push(Indexed { indices, value: acc });
        }
        Ok(Report::Field {
            command: "rp",
            args: vec![a.to_string(), m.to_string(), b.to_string()],
            results,
        })
    }

    pub fn borcherds(&self, args: &[String], window: Window) -> Result<Report, CliError> {
        let engine = self.engine();
        let mut results = Vec::new();
        for (indices, tuples) in self.expand(args, false)? {
            let t = &tuples[0];
            let nfs = t
                .iter()
                .map(|e| engine.normalize(e))
                .collect::<Result<Vec<_>, _>>()?;
            let value = check_borcherds(&engine, &nfs[0], &nfs[1], &nfs[2], &window)?;
            results.push(Indexed { indices, value });
        }
        Ok(Report::Borcherds {
            args: args.to_vec(),
            window,
            results,
        })
    }

    pub fn consistency(&self, cutoff: u32) -> Result<Report, CliError> {
        let report = self.alg.check_consistency(cutoff)?;
        Ok(Report::Consistency { cutoff, report })
    }

    pub fn oracle(&self, arg: &str, opts: &OracleOptions) -> Result<Report, CliError> {
        let constants = ParamSpace::new(Vec::<String>::new());
        let value = |name: &str, text: &str| -> Result<GaussRat, CliError> {
            Scalar::parse(text, &constants)
                .ok()
                .and_then(|s| s.constant_value())
                .ok_or_else(|| CliError::Usage(format!("`{name}={text}`: expected a number")))
        };
        let mut pairs = Vec::new();
        for (name, text) in &opts.bindings {
            pairs.push((name.as_str(), value(name, text)?));
        }
        let bindings = self
            .alg
            .params()
            .bind(pairs)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let highest = match opts.module {
            ModuleKind::Vacuum => {
                if !opts.highest.is_empty() {
                    return Err(CliError::Usage(
                        "highest-weight eigenvalues need `--module verma`".into(),
                    ));
                }
                HighestWeight::Vacuum
            }
            ModuleKind::Verma => {
                let mut eig = BTreeMap::new();
                for (name, text) in &opts.highest {
                    let g = self
                        .alg
                        .generator_id(name)
                        .ok_or_else(|| CliError::Usage(format!("unknown generator `{name}`")))?;
                    eig.insert(g, value(name, text)?);
                }
                HighestWeight::Verma(eig)
            }
        };
        let module = GradedModule::build(&self.alg, bindings, highest, opts.level)?;
        let engine = self.engine();
        let args = vec![arg.to_string()];
        let mut results = Vec::new();
        for (indices, tuples) in self.expand(&args, false)? {
            let e = &tuples[0][0];
            let nf = engine.normalize(e)?;
            let value = module.verify_against_symbolic(&nf, e)?;
            results.push(Indexed { indices, value });
        }
        Ok(Report::Oracle {
            args,
            module: opts.module,
            bindings: opts.bindings.clone(),
            level: opts.level,
            dims: module.level_dims(),
            results,
        })
    }

    /// `let name = expr`: later expressions may use `name`.
    pub fn define(&mut self, name: &str, text: &str) -> Result<Report, CliError> {
        let valid = name.starts_with(|c: char| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric());
        if !valid || RESERVED.contains(&name) {
            return Err(CliError::Usage(format!("`{name}` is not a valid name")));
        }
        if self.alg.generator_id(name).is_some()
            || self.alg.param(name).is_some()
            || !family(&self.alg, name).is_empty()
        {
            return Err(CliError::Usage(format!("`{name}` is already a generator or parameter")));
        }
        let value = self.parse(text)?;
        self.scope.definitions.insert(name.to_string(), value.clone());
        Ok(Report::Definition {
            name: name.to_string(),
            value,
        })
    }
}

/// All assignments of values to variables, first variable slowest.
fn cartesian(vars: &[(String, Vec<String>)]) -> Vec<Indices> {
    let mut out: Vec<Indices> = vec![Vec::new()];
    for (v, values) in vars {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push((v.clone(), x.clone()));
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chiral_core::algebra::presets;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn sugawara_query_lifts_the_sum() {
        let session = Session::new(presets::su2(), u64::MAX);
        let report = session
            .series(SeriesKind::WickRight, &[s("sum(b){J^b}"), s("J^b"), s("J^a")])
            .unwrap();
        let Report::Series { results, .. } = report else { panic!() };
        assert_eq!(results.len(), 3);
        let alg = session.algebra();
        for (r, a) in results.iter().zip(["1", "2", "3"]) {
            assert_eq!(r.indices, vec![(s("a"), s(a))]);
            assert_eq!(r.value.poles.len(), 2);
            assert_eq!(r.value.get(2).render(alg), format!("(k + 2)*J^{a}"));
            assert_eq!(r.value.get(1).render(alg), format!("(k + 2)*d J^{a}"));
        }
    }

    #[test]
    fn definitions_resolve_in_later_queries() {
        let mut session = Session::new(presets::su2(), u64::MAX);
        session.define("S", "sum(b){:J^b J^b:}").unwrap();
        let Report::Series { results, .. } =
            session.series(SeriesKind::Ope, &[s("S"), s("J^1")]).unwrap()
        else {
            panic!()
        };
        assert_eq!(results[0].value.get(2).render(session.algebra()), "(k + 2)*J^1");
        assert!(session.define("J", "I").is_err());
        assert!(session.define("X", "2*S").is_ok());
        assert!(session.define("k", "I").is_err());
        assert!(session.define("d", "I").is_err());
    }

    #[test]
    fn cartesian_order() {
        let vars = vec![(s("a"), vec![s("1"), s("2")]), (s("b"), vec![s("x"), s("y")])];
        let all = cartesian(&vars);
        assert_eq!(all.len(), 4);
        assert_eq!(all[1], vec![(s("a"), s("1")), (s("b"), s("y"))]);
    }
}
