//! Command line front end: algebra definition files, the expression
//! grammar, query scripts and text/JSON/LaTeX rendering.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use chiral_core::algebra::presets;
use chiral_core::{Algebra, Window, DEFAULT_STEP_BUDGET};

pub mod dsl;
pub mod render;
pub mod session;
pub mod syntax;

pub use render::Format;
use session::{ModuleKind, OracleOptions, Report, SeriesKind, Session};

/// Environment variable holding the default rewrite step budget.
pub const BUDGET_ENV: &str = "CHIRAL_STEP_BUDGET";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn syntax(text: &str, e: syntax::SyntaxError) -> Self {
        CliError::Usage(format!("in `{text}`: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Budget(_) => exit::BUDGET,
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BUDGET: i32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Virasoro,
    Su2,
}

#[derive(Debug, Parser)]
#[command(name = "chiral", version, about = "Operator product expansions of chiral fields")]
pub struct Cli {
    /// Algebra definition file.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub algebra: Option<PathBuf>,
    /// Built-in algebra, used when no file is given.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Rewrite step budget per command (overrides CHIRAL_STEP_BUDGET).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(flatten)]
    Query(Query),
    /// Run a query script.
    Run { script: PathBuf },
    /// Print the active algebra as a definition file.
    ShowAlgebra,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Query {
    /// Singular part of A(z) B(w).
    Ope { a: String, b: String },
    /// Normal form of an expression.
    Nf { expr: String },
    /// Residue product a_(m) b.
    Rp {
        a: String,
        #[arg(allow_negative_numbers = true)]
        m: i64,
        b: String,
    },
    /// Singular part of A(z) :BC:(w) from the first generalized Wick theorem.
    WickLeft { a: String, b: String, c: String },
    /// Singular part of :AB:(z) C(w) from the second generalized Wick theorem.
    WickRight { a: String, b: String, c: String },
    /// Check the Borcherds identity on a window of (p, q, r).
    CheckBorcherds {
        a: String,
        b: String,
        c: String,
        /// `p1..p2,q1..q2,r1..r2`, bounds inclusive.
        #[arg(long, default_value = "-2..3,-2..3,-2..3", value_parser = parse_window, allow_hyphen_values = true)]
        window: Window,
    },
    /// Check skew symmetry and the Borcherds identity on all generators.
    CheckAlgebra {
        #[arg(long, default_value_t = 4)]
        cutoff: u32,
    },
    /// Compare a normal form with its expression mode by mode.
    OracleVerify(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    pub expr: String,
    /// Parameter values, `name=value`, comma separated or repeated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub bindings: Vec<(String, String)>,
    /// Highest level of the truncated module.
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    #[arg(long, value_enum, default_value = "vacuum")]
    pub module: ModuleArg,
    /// Zero-mode eigenvalues for the Verma module, `generator=value`.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub hw: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModuleArg {
    Vacuum,
    Verma,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (n, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    Ok((n.trim().to_string(), v.trim().to_string()))
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let ranges: Vec<&str> = s.split(',').collect();
    if ranges.len() != 3 {
        return Err(format!("expected p1..p2,q1..q2,r1..r2, got `{s}`"));
    }
    let mut out = Vec::new();
    for r in ranges {
        let (lo, hi) = r
            .split_once("..")
            .ok_or_else(|| format!("expected lo..hi, got `{r}`"))?;
        let lo: i64 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
        let hi: i64 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
        out.push(lo..=hi);
    }
    let r = out.pop().expect("three ranges");
    let q = out.pop().expect("three ranges");
    let p = out.pop().expect("three ranges");
    Ok(Window::new(p, q, r))
}

pub fn load_algebra(path: &Path) -> Result<Algebra, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    dsl::parse_algebra(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn preset(p: Preset) -> Algebra {
    match p {
        Preset::Virasoro => presets::virasoro(),
        Preset::Su2 => presets::su2(),
    }
}

/// Budget from the flag, else the environment, else the default.
pub fn step_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{BUDGET_ENV}={v} is not a step count"))),
        Err(_) => Ok(DEFAULT_STEP_BUDGET),
    }
}

/// First line of a clap error without its `error: ` prefix.
fn clap_message(e: &clap::Error) -> String {
    let text = e.render().to_string();
    let first = text.lines().next().unwrap_or_default();
    first.strip_prefix("error: ").unwrap_or(first).to_string()
}

pub fn run_query(session: &Session, q: &Query) -> Result<Report, CliError> {
    let strings = |xs: &[&String]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match q {
        Query::Ope { a, b } => session.series(SeriesKind::Ope, &strings(&[a, b])),
        Query::Nf { expr } => session.normal_form(expr),
        Query::Rp { a, m, b } => session.residue_product(a, *m, b),
        Query::WickLeft { a, b, c } => session.series(SeriesKind::WickLeft, &strings(&[a, b, c])),
        Query::WickRight { a, b, c } => {
            session.series(SeriesKind::WickRight, &strings(&[a, b, c]))
        }
        Query::CheckBorcherds { a, b, c, window } => {
            session.borcherds(&strings(&[a, b, c]), window.clone())
        }
        Query::CheckAlgebra { cutoff } => session.consistency(*cutoff),
        Query::OracleVerify(o) => session.oracle(
            &o.expr,
            &OracleOptions {
                bindings: o.bindings.clone(),
                level: o.level,
                module: match o.module {
                    ModuleArg::Vacuum => ModuleKind::Vacuum,
                    ModuleArg::Verma => ModuleKind::Verma,
                },
                highest: o.hw.clone(),
            },
        ),
    }
}

/// Split a script line into words; double or single quotes group words.
pub fn split_words(line: &str) -> Result<Vec<String>, String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    let mut in_word = false;
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' | '\'' => {
                in_word = true;
                loop {
                    match chars.next() {
                        Some(q) if q == c => break,
                        Some(x) => cur.push(x),
                        None => return Err(format!("unclosed {c}")),
                    }
                }
            }
            c if c.is_whitespace() => {
                if in_word {
                    words.push(std::mem::take(&mut cur));
                    in_word = false;
                }
            }
            c => {
                in_word = true;
                cur.push(c);
            }
        }
    }
    if in_word {
        words.push(cur);
    }
    Ok(words)
}

#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct ScriptLine {
    #[command(subcommand)]
    query: Query,
}

/// Run a query script. Before the first query it may select the algebra
/// with `algebra FILE` (relative to the script) or `preset NAME`; `let NAME
/// = EXPR` defines a name for later lines.
pub fn run_script(
    text: &str,
    dir: &Path,
    default: Algebra,
    budget: u64,
) -> Result<(Algebra, Report), CliError> {
    let mut chosen: Option<Algebra> = None;
    let mut session: Option<Session> = None;
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: CliError| match e {
            CliError::Usage(m) => CliError::Usage(format!("line {}: {m}", n + 1)),
            CliError::Budget(m) => CliError::Budget(format!("line {}: {m}", n + 1)),
        };
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "algebra" | "preset" => {
                if chosen.is_some() || session.is_some() {
                    return Err(at(CliError::Usage(
                        "a script selects its algebra once, before any other command".into(),
                    )));
                }
                let alg = if head == "algebra" {
                    let words = split_words(rest).map_err(|e| at(CliError::Usage(e)))?;
                    let [path] = words.as_slice() else {
                        return Err(at(CliError::Usage("expected `algebra FILE`".into())));
                    };
                    load_algebra(&dir.join(path)).map_err(at)?
                } else {
                    let p = Preset::from_str(rest, true)
                        .map_err(|_| at(CliError::Usage(format!("unknown preset `{rest}`"))))?;
                    preset(p)
                };
                chosen = Some(alg);
                continue;
            }
            _ => {}
        }
        let s = session.get_or_insert_with(|| {
            Session::new(chosen.take().unwrap_or_else(|| default.clone()), budget)
        });
        let report = if head == "let" {
            let (name, expr) = rest
                .split_once('=')
                .ok_or_else(|| at(CliError::Usage("expected `let NAME = EXPR`".into())))?;
            s.define(name.trim(), expr.trim()).map_err(at)?
        } else {
            let words = split_words(line).map_err(|e| at(CliError::Usage(e)))?;
            let parsed = ScriptLine::try_parse_from(words)
                .map_err(|e| at(CliError::Usage(clap_message(&e))))?;
            run_query(s, &parsed.query).map_err(at)?
        };
        steps.push((line.to_string(), report));
    }
    let alg = match session {
        Some(s) => s.algebra().clone(),
        None => chosen.unwrap_or(default),
    };
    Ok((alg, Report::Script { steps }))
}

/// Execute a parsed command line; returns the rendered output and exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32), CliError> {
    let budget = step_budget(cli.budget)?;
    let alg = match (&cli.algebra, cli.preset) {
        (Some(path), _) => load_algebra(path)?,
        (None, Some(p)) => preset(p),
        (None, None) => presets::virasoro(),
    };
    let (alg, report) = match &cli.command {
        Command::Query(q) => {
            let session = Session::new(alg, budget);
            let report = run_query(&session, q)?;
            (session.algebra().clone(), report)
        }
        Command::Run { script } => {
            let text = std::fs::read_to_string(script)
                .map_err(|e| CliError::Usage(format!("{}: {e}", script.display())))?;
            let dir = script.parent().unwrap_or(Path::new("."));
            run_script(&text, dir, alg, budget)?
        }
        Command::ShowAlgebra => {
            let text = dsl::render_algebra(&alg);
            (alg, Report::Algebra { text })
        }
    };
    let code = if report.passed() {
        exit::OK
    } else {
        exit::CHECK_FAILED
    };
    Ok((render::render(&report, &alg, cli.format), code))
}
