//! Generators, the singular OPE table, presets and consistency validation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::borcherds::{self, Window};
use crate::engine::{Engine, EngineError};
use crate::expr::{GenId, Letter, Monomial, NormalForm};
use crate::scalar::{ParamSpace, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("name `{0}` is used both as a parameter and as a generator")]
    NameClash(String),
    #[error("generator `{name}` has weight {weight}; weights must be at least 1")]
    InvalidWeight { name: String, weight: u32 },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate OPE entry ({left}, {right}, {pole})")]
    DuplicateEntry { left: String, right: String, pole: u32 },
    #[error(
        "OPE entry ({left}, {right}, {pole}) has a term of weight {found}; expected weight {expected}"
    )]
    WeightMismatch {
        left: String,
        right: String,
        pole: u32,
        expected: i64,
        found: i64,
    },
    #[error("structure constants have {found} entries, expected dim^3 = {expected}")]
    StructureConstantCount { expected: usize, found: usize },
    #[error("structure constants are not antisymmetric at indices ({0}, {1}, {2})")]
    Antisymmetry(usize, usize, usize),
    #[error("Jacobi identity fails at indices ({0}, {1}, {2}; {3})")]
    Jacobi(usize, usize, usize, usize),
    #[error(
        "normalization sum_(a,b) f^(ab{c}) f_(ab{d}) = 2 h_dual delta fails at (c, d) = ({c}, {d}): expected {expected}, found {found}"
    )]
    Normalization {
        c: usize,
        d: usize,
        expected: String,
        found: String,
    },
    #[error("consistency cutoff {cutoff} is below the maximal generator weight {max_weight}")]
    CutoffTooSmall { cutoff: u32, max_weight: u32 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorDecl {
    pub name: String,
    pub weight: u32,
}

impl GeneratorDecl {
    pub fn new(name: impl Into<String>, weight: u32) -> Self {
        GeneratorDecl {
            name: name.into(),
            weight,
        }
    }
}

/// One user-supplied singular OPE coefficient `left_(pole) right = value`.
#[derive(Clone, Debug)]
pub struct OpeEntry {
    pub left: String,
    pub right: String,
    pub pole: u32,
    pub value: NormalForm,
}

impl OpeEntry {
    pub fn new(left: &str, right: &str, pole: u32, value: NormalForm) -> Self {
        OpeEntry {
            left: left.to_string(),
            right: right.to_string(),
            pole,
            value,
        }
    }
}

/// Nonnegative residue products of generator pairs; absent entries are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpeTable {
    entries: BTreeMap<(GenId, GenId), Vec<NormalForm>>,
}

impl OpeTable {
    pub fn get(&self, a: GenId, b: GenId, pole: u32) -> Option<&NormalForm> {
        self.entries
            .get(&(a, b))
            .and_then(|v| v.get(pole as usize))
            .filter(|nf| !nf.is_zero())
    }

    /// Number of stored poles for the pair (one past the highest nonzero).
    pub fn pole_count(&self, a: GenId, b: GenId) -> usize {
        self.entries.get(&(a, b)).map_or(0, Vec::len)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (GenId, GenId)> + '_ {
        self.entries.keys().copied()
    }

    fn set(&mut self, a: GenId, b: GenId, pole: u32, value: NormalForm) {
        let row = self.entries.entry((a, b)).or_default();
        if row.len() <= pole as usize {
            row.resize(pole as usize + 1, NormalForm::zero());
        }
        row[pole as usize] = value;
        while row.last().is_some_and(NormalForm::is_zero) {
            row.pop();
        }
        if row.is_empty() {
            self.entries.remove(&(a, b));
        }
    }
}

/// Lie-algebra data of a current algebra. Indices are raised and lowered
/// with `g^(ab) = delta/metric` and `g_(ab) = metric * delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieData {
    /// Short name used by the definition file shorthand, e.g. `su2`.
    pub name: Option<String>,
    pub dim: usize,
    pub h_dual: i64,
    pub metric: i64,
    pub level_param: String,
    /// `f^(abc)` flattened as `f[(a*dim + b)*dim + c]`, zero-based.
    pub structure_constants: Vec<Scalar>,
}

impl LieData {
    pub fn f(&self, a: usize, b: usize, c: usize) -> &Scalar {
        &self.structure_constants[(a * self.dim + b) * self.dim + c]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Algebra {
    params: ParamSpace,
    generators: Vec<GeneratorDecl>,
    table: OpeTable,
    declared: BTreeSet<(GenId, GenId)>,
    lie: Option<LieData>,
}

impl Algebra {
    /// Build an algebra from declarations and singular OPE data.
    ///
    /// Pairs `(B, A)` that are not declared while `(A, B)` is are filled in
    /// from skew symmetry.
    pub fn define(
        params: Vec<String>,
        generators: Vec<GeneratorDecl>,
        entries: Vec<OpeEntry>,
    ) -> Result<Algebra, AlgebraError> {
        let mut seen = BTreeSet::new();
        for p in &params {
            if !seen.insert(p.clone()) {
                return Err(AlgebraError::DuplicateParam(p.clone()));
            }
        }
        let mut names = BTreeSet::new();
        for g in &generators {
            if !names.insert(g.name.clone()) {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
            if seen.contains(&g.name) {
                return Err(AlgebraError::NameClash(g.name.clone()));
            }
            if g.weight < 1 {
                return Err(AlgebraError::InvalidWeight {
                    name: g.name.clone(),
                    weight: g.weight,
                });
            }
        }
        let mut alg = Algebra {
            params: ParamSpace::new(params),
            generators,
            table: OpeTable::default(),
            declared: BTreeSet::new(),
            lie: None,
        };
        let mut seen_entries = BTreeSet::new();
        for e in entries {
            let a = alg
                .generator_id(&e.left)
                .ok_or_else(|| AlgebraError::UnknownGenerator(e.left.clone()))?;
            let b = alg
                .generator_id(&e.right)
                .ok_or_else(|| AlgebraError::UnknownGenerator(e.right.clone()))?;
            if !seen_entries.insert((a, b, e.pole)) {
                return Err(AlgebraError::DuplicateEntry {
                    left: e.left,
                    right: e.right,
                    pole: e.pole,
                });
            }
            for (m, _) in e.value.iter() {
                if let Some(bad) = m.letters().iter().find(|l| l.gen >= alg.generators.len()) {
                    return Err(AlgebraError::UnknownGenerator(format!("#{}", bad.gen)));
                }
            }
            let expected =
                alg.weight_of(a) as i64 + alg.weight_of(b) as i64 - e.pole as i64 - 1;
            for (m, _) in e.value.iter() {
                let found = m.weight(&alg);
                if found != expected {
                    return Err(AlgebraError::WeightMismatch {
                        left: e.left,
                        right: e.right,
                        pole: e.pole,
                        expected,
                        found,
                    });
                }
            }
            alg.declared.insert((a, b));
            alg.table.set(a, b, e.pole, e.value);
        }
        alg.complete_by_skew_symmetry()?;
        Ok(alg)
    }

    fn complete_by_skew_symmetry(&mut self) -> Result<(), AlgebraError> {
        let missing: Vec<(GenId, GenId)> = self
            .declared
            .iter()
            .filter(|(a, b)| a != b && !self.declared.contains(&(*b, *a)))
            .copied()
            .collect();
        if missing.is_empty() {
            return Ok(());
        }
        let mut fills = Vec::new();
        {
            let engine = Engine::new(self);
            for (a, b) in missing {
                let (na, nb) = (NormalForm::generator(a), NormalForm::generator(b));
                let top = self.weight_of(a) as i64 + self.weight_of(b) as i64 - 1;
                for m in 0..=top.max(-1) {
                    let value = engine.skew(&nb, m, &na)?;
                    if !value.is_zero() {
                        fills.push((b, a, m as u32, value));
                    }
                }
            }
        }
        for (b, a, m, value) in fills {
            self.table.set(b, a, m, value);
        }
        Ok(())
    }

    pub fn params(&self) -> &ParamSpace {
        &self.params
    }

    pub fn generators(&self) -> &[GeneratorDecl] {
        &self.generators
    }

    pub fn table(&self) -> &OpeTable {
        &self.table
    }

    pub fn lie_data(&self) -> Option<&LieData> {
        self.lie.as_ref()
    }

    /// Pairs given explicitly at definition time (the rest came from skew symmetry).
    pub fn declared_pairs(&self) -> impl Iterator<Item = (GenId, GenId)> + '_ {
        self.declared.iter().copied()
    }

    pub fn generator_id(&self, name: &str) -> Option<GenId> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn generator_name(&self, g: GenId) -> &str {
        &self.generators[g].name
    }

    pub fn weight_of(&self, g: GenId) -> u32 {
        self.generators[g].weight
    }

    pub fn max_generator_weight(&self) -> u32 {
        self.generators.iter().map(|g| g.weight).max().unwrap_or(0)
    }

    pub fn param(&self, name: &str) -> Option<Scalar> {
        self.params.index_of(name).map(Scalar::param)
    }

    /// The generator named `name` as a normal form.
    pub fn field(&self, name: &str) -> Option<NormalForm> {
        self.generator_id(name).map(NormalForm::generator)
    }

    /// True when every table entry is a combination of single derived
    /// generators and the identity.
    pub fn is_linear(&self) -> bool {
        self.table
            .entries
            .values()
            .flatten()
            .all(|nf| nf.iter().all(|(m, _)| m.len() <= 1))
    }

    /// Check skew symmetry for all generator pairs and the Borcherds
    /// identity for all generator triples with `p, q, r` in `0..=cutoff`.
    pub fn check_consistency(&self, cutoff: u32) -> Result<ConsistencyReport, AlgebraError> {
        let max_weight = self.max_generator_weight();
        if cutoff < max_weight {
            return Err(AlgebraError::CutoffTooSmall { cutoff, max_weight });
        }
        let engine = Engine::new(self);
        let n = self.generators.len();
        let mut report = ConsistencyReport::default();
        for a in 0..n {
            for b in 0..n {
                let (na, nb) = (NormalForm::generator(a), NormalForm::generator(b));
                let top = self.weight_of(a) as i64 + self.weight_of(b) as i64 - 1;
                for m in 0..=top {
                    report.skew_checked += 1;
                    let direct = engine.residue_product(&nb, m, &na)?;
                    let skew = engine.skew(&nb, m, &na)?;
                    if direct != skew {
                        report.skew_violations.push(SkewViolation {
                            left: b,
                            right: a,
                            pole: m,
                            direct,
                            skew,
                        });
                    }
                }
            }
        }
        let c = cutoff as i64;
        let window = Window::new(0..=c, 0..=c, 0..=c);
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    let r = borcherds::check_borcherds(
                        &engine,
                        &NormalForm::generator(a),
                        &NormalForm::generator(b),
                        &NormalForm::generator(cc),
                        &window,
                    )?;
                    report.borcherds_checked += r.checked;
                    report
                        .borcherds_violations
                        .extend(r.violations.into_iter().map(|v| ((a, b, cc), v)));
                }
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewViolation {
    pub left: GenId,
    pub right: GenId,
    pub pole: i64,
    pub direct: NormalForm,
    pub skew: NormalForm,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConsistencyReport {
    pub skew_checked: usize,
    pub skew_violations: Vec<SkewViolation>,
    pub borcherds_checked: usize,
    pub borcherds_violations: Vec<((GenId, GenId, GenId), borcherds::BorcherdsViolation)>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.skew_violations.is_empty() && self.borcherds_violations.is_empty()
    }
}

/// Validate Lie structure constants: total antisymmetry, the Jacobi
/// identity and `sum_(a,b) f^(abc) f_(abd) = 2 h_dual delta^c_d`.
pub fn validate_lie_data(
    f: &[Scalar],
    dim: usize,
    h_dual: i64,
    metric: i64,
) -> Result<(), AlgebraError> {
    if f.len() != dim * dim * dim {
        return Err(AlgebraError::StructureConstantCount {
            expected: dim * dim * dim,
            found: f.len(),
        });
    }
    let at = |a: usize, b: usize, c: usize| &f[(a * dim + b) * dim + c];
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let x = at(a, b, c);
                let neg = -x;
                if at(b, a, c) != &neg || at(a, c, b) != &neg || at(c, b, a) != &neg {
                    return Err(AlgebraError::Antisymmetry(a + 1, b + 1, c + 1));
                }
            }
        }
    }
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                for e in 0..dim {
                    let mut s = Scalar::zero();
                    for d in 0..dim {
                        s = &s + &(at(a, b, d) * at(d, c, e));
                        s = &s + &(at(b, c, d) * at(d, a, e));
                        s = &s + &(at(c, a, d) * at(d, b, e));
                    }
                    if !s.is_zero() {
                        return Err(AlgebraError::Jacobi(a + 1, b + 1, c + 1, e + 1));
                    }
                }
            }
        }
    }
    // f_(abd) = metric^3 f^(abd)
    let lower = Scalar::from_int(metric.pow(3));
    for c in 0..dim {
        for d in 0..dim {
            let mut s = Scalar::zero();
            for a in 0..dim {
                for b in 0..dim {
                    s = &s + &(at(a, b, c) * at(a, b, d));
                }
            }
            let found = &s * &lower;
            let expected = if c == d {
                Scalar::from_int(2 * h_dual)
            } else {
                Scalar::zero()
            };
            if found != expected {
                return Err(AlgebraError::Normalization {
                    c: c + 1,
                    d: d + 1,
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
    }
    Ok(())
}

pub mod presets {
    //! Ready-made algebras.

    use super::*;

    /// The Virasoro algebra: one generator `T` of weight 2 and central charge `c`.
    pub fn virasoro() -> Algebra {
        let c = Scalar::param(0);
        let t = Letter::new(0, 0);
        let dt = Letter::new(0, 1);
        let entries = vec![
            OpeEntry::new(
                "T",
                "T",
                3,
                NormalForm::term(&c * &Scalar::from_ratio(1, 2), Monomial::identity()),
            ),
            OpeEntry::new("T", "T", 1, NormalForm::term(Scalar::from_int(2), Monomial::letter(t))),
            OpeEntry::new("T", "T", 0, NormalForm::letter(dt)),
        ];
        Algebra::define(vec!["c".into()], vec![GeneratorDecl::new("T", 2)], entries)
            .expect("virasoro preset is well formed")
    }

    /// Current algebra with level `k`: generators `J^1 .. J^dim` of weight 1,
    /// `J^a_(1) J^b = (k/2) delta^(ab) I` and `J^a_(0) J^b = i f^(ab)_c J^c`.
    pub fn current_algebra(
        structure_constants: Vec<Scalar>,
        dim: usize,
        h_dual: i64,
    ) -> Result<Algebra, AlgebraError> {
        current_algebra_with(structure_constants, dim, h_dual, 2, "k", None)
    }

    /// [`current_algebra`] with an explicit metric normalization, level
    /// parameter name and short name.
    pub fn current_algebra_with(
        structure_constants: Vec<Scalar>,
        dim: usize,
        h_dual: i64,
        metric: i64,
        level: &str,
        name: Option<&str>,
    ) -> Result<Algebra, AlgebraError> {
        validate_lie_data(&structure_constants, dim, h_dual, metric)?;
        let params = ParamSpace::new([level]);
        let k = params.param(level).expect("declared");
        let gens: Vec<GeneratorDecl> = (1..=dim)
            .map(|a| GeneratorDecl::new(format!("J^{a}"), 1))
            .collect();
        let half_k = &k * &Scalar::from_ratio(1, 2);
        let metric_s = Scalar::from_int(metric);
        let mut entries = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                let (na, nb) = (&gens[a].name, &gens[b].name);
                if a == b {
                    entries.push(OpeEntry::new(
                        na,
                        nb,
                        1,
                        NormalForm::term(half_k.clone(), Monomial::identity()),
                    ));
                }
                let mut v = NormalForm::zero();
                for c in 0..dim {
                    let f = &structure_constants[(a * dim + b) * dim + c];
                    if !f.is_zero() {
                        // i f^(ab)_c = i f^(abd) g_(dc)
                        let coeff = &(&Scalar::i() * f) * &metric_s;
                        v.add_term(Monomial::letter(Letter::new(c, 0)), &coeff);
                    }
                }
                entries.push(OpeEntry::new(na, nb, 0, v));
            }
        }
        let mut alg = Algebra::define(vec![level.to_string()], gens, entries)?;
        alg.lie = Some(LieData {
            name: name.map(str::to_string),
            dim,
            h_dual,
            metric,
            level_param: level.to_string(),
            structure_constants,
        });
        Ok(alg)
    }

    /// `epsilon^(abc)` for three indices.
    pub fn levi_civita(a: usize, b: usize, c: usize) -> i64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    }

    /// `f^(abc) = 1/2 epsilon^(abc)`, normalized so that the dual Coxeter number is 2.
    pub fn su2_structure_constants() -> Vec<Scalar> {
        let mut f = Vec::with_capacity(27);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    f.push(Scalar::from_ratio(levi_civita(a, b, c), 2));
                }
            }
        }
        f
    }

    /// The su(2) current algebra at symbolic level `k`.
    pub fn su2() -> Algebra {
        su2_with_level("k")
    }

    pub fn su2_with_level(level: &str) -> Algebra {
        current_algebra_with(su2_structure_constants(), 3, 2, 2, level, Some("su2"))
            .expect("su2 preset is well formed")
    }
}
