//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use chiral_core::borcherds::borcherds_sides;
use chiral_core::expr::{deriv, nop, prod};
use chiral_core::wick::ope;
use chiral_core::{
    contour_kernel, wick_left, wick_right, Algebra, Engine, FieldExpr, GaussRat, GradedModule,
    HighestWeight, Letter, Monomial, NormalForm, Scalar, Window,
};
use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::SeedableRng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn scalar(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn id_term(c: Scalar) -> NormalForm {
    NormalForm::term(c, Monomial::identity())
}

fn casimir(e: &Engine) -> NormalForm {
    let mut s = NormalForm::zero();
    for b in 0..3 {
        s = s.add(&e.nop(&j(b), &j(b)).unwrap());
    }
    s
}

/// Poles of `(TT)(z) T(w)` exactly as quoted, with `d^2 = 2 d^(2)` and
/// `d :TT:` left to the engine's derivative.
fn expected_tt_t(e: &Engine, c: &Scalar) -> BTreeMap<u32, NormalForm> {
    let tt = e.nop(&t(), &t()).unwrap();
    let d = |nf: &NormalForm, k| e.derivative(nf, k).unwrap();
    let d_sq_t = d(&d(&t(), 1), 1);
    BTreeMap::from([
        (6, id_term(&scalar(3) * c)),
        (4, t().scale(&(&scalar(8) + c))),
        (3, dt().scale(&(&scalar(5) + c))),
        (
            2,
            tt.scale(&scalar(4))
                .add(&d_sq_t.scale(&(&Scalar::one() + &(c * &Scalar::from_ratio(1, 2))))),
        ),
        (
            1,
            d(&t(), 3)
                .scale(&(c - &Scalar::one()))
                .add(&d(&tt, 1).scale(&scalar(3))),
        ),
    ])
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let vir = virasoro();
    let e = Engine::new(&vir);
    let c = vir.param("c").unwrap();
    let expect = expected_tt_t(&e, &c);
    let tt = e.nop(&t(), &t()).unwrap();
    let wick = wick_right(&e, &t(), &t(), &t()).map_err(|x| x.to_string())?;
    let direct = ope(&e, &tt, &t()).map_err(|x| x.to_string())?;
    ensure(wick.poles == expect, || format!("wick_right gave {:?}", wick.poles.keys()))?;
    ensure(direct.poles == expect, || "direct route differs".into())?;
    within(start, Duration::from_secs(1))
}

fn criterion_2() -> Result<String, String> {
    let vir = virasoro();
    let e = Engine::new(&vir);
    let t_ = FieldExpr::Generator(0);
    let dt_ = deriv(1, t_.clone());
    let expr = FieldExpr::Sum(vec![
        (Scalar::one(), nop(t_.clone(), dt_.clone())),
        (scalar(-1), nop(dt_, t_)),
    ]);
    let nf = e.normalize(&expr).map_err(|x| x.to_string())?;
    ensure(nf == NormalForm::letter(Letter::new(0, 3)), || nf.render(&vir))?;
    Ok(nf.render(&vir))
}

fn criterion_3() -> Result<String, String> {
    let su2 = su2();
    let e = Engine::new(&su2);
    let s = casimir(&e);
    let k2 = &su2.param("k").unwrap() + &scalar(2);
    for a in 0..3 {
        let one = e.residue_product(&s, 1, &j(a)).unwrap();
        let zero = e.residue_product(&s, 0, &j(a)).unwrap();
        ensure(one == j(a).scale(&k2), || format!("pole 2, a = {}", a + 1))?;
        ensure(zero == dj(a).scale(&k2), || format!("pole 1, a = {}", a + 1))?;
    }
    Ok("a = 1, 2, 3".into())
}

fn criterion_4() -> Result<String, String> {
    let start = Instant::now();
    let su2 = su2();
    let e = Engine::new(&su2);
    let k = su2.param("k").unwrap();
    let k2 = &k + &scalar(2);
    let s = casimir(&e);
    let tt = s.scale(&k2.inv().unwrap());
    let c = (&scalar(3) * &k).checked_div(&k2).unwrap();
    let got = ope(&e, &s, &tt).map_err(|x| x.to_string())?;
    let expect = BTreeMap::from([
        (4, id_term(&k2 * &(&c * &Scalar::from_ratio(1, 2)))),
        (2, tt.scale(&(&k2 * &scalar(2)))),
        (1, e.derivative(&tt, 1).unwrap().scale(&k2)),
    ]);
    ensure(got.poles == expect, || {
        format!(
            "got poles {:?}",
            got.poles.iter().map(|(p, v)| (p, v.render(&su2))).collect::<Vec<_>>()
        )
    })?;
    within(start, Duration::from_secs(10))
}

fn criterion_5() -> Result<String, String> {
    let su2 = su2();
    let e = Engine::new(&su2);
    let k2 = &su2.param("k").unwrap() + &scalar(2);
    let tt = casimir(&e).scale(&k2.inv().unwrap());
    for a in 0..3 {
        let got = ope(&e, &j(a), &tt).map_err(|x| x.to_string())?;
        ensure(got.poles == BTreeMap::from([(2, j(a))]), || format!("a = {}", a + 1))?;
    }
    Ok("a = 1, 2, 3".into())
}

const BORCHERDS_TRIPLES: [(&str, u64, usize); 2] = [("virasoro", 0xB0, 200), ("su2", 0x5A, 100)];
const BORCHERDS_LIMIT: Duration = Duration::from_secs(300);

/// Progress shared with the worker thread of criterion 6.
#[derive(Default)]
struct BorcherdsProgress {
    triples: [AtomicUsize; 2],
    instances: AtomicUsize,
    /// Milliseconds until each algebra's batch completed.
    finished_ms: [AtomicU64; 2],
}

fn borcherds_worker(progress: &BorcherdsProgress, stop: &AtomicBool) -> Result<(), String> {
    let start = Instant::now();
    for (slot, (name, seed, count)) in BORCHERDS_TRIPLES.into_iter().enumerate() {
        let alg = if name == "su2" { su2() } else { virasoro() };
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..count {
            // a fresh engine per triple keeps the caches from growing across triples
            let e = Engine::with_budget(&alg, u64::MAX);
            let a = random_field(&alg, &e, &mut rng, 6);
            let b = random_field(&alg, &e, &mut rng, 6);
            let c = random_field(&alg, &e, &mut rng, 6);
            let window = Window::cube(-2..=3);
            for p in window.p.clone() {
                for q in window.q.clone() {
                    for r in window.r.clone() {
                        if stop.load(Ordering::Relaxed) {
                            return Ok(());
                        }
                        let sides = borcherds_sides(&e, &a, &b, &c, p, q, r).map_err(|x| x.to_string())?;
                        if !sides.holds() {
                            return Err(format!(
                                "{name}: ({}, {}, {}) at (p, q, r) = ({p}, {q}, {r})",
                                a.render(&alg),
                                b.render(&alg),
                                c.render(&alg),
                            ));
                        }
                        progress.instances.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
            progress.triples[slot].fetch_add(1, Ordering::Relaxed);
        }
        progress.finished_ms[slot].store(start.elapsed().as_millis() as u64, Ordering::Relaxed);
    }
    Ok(())
}

fn criterion_6() -> Result<String, String> {
    let start = Instant::now();
    let progress = Arc::new(BorcherdsProgress::default());
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    {
        let (progress, stop) = (progress.clone(), stop.clone());
        thread::spawn(move || {
            let _ = tx.send(borcherds_worker(&progress, &stop));
        });
    }
    let outcome = rx.recv_timeout(BORCHERDS_LIMIT);
    stop.store(true, Ordering::Relaxed);
    let batch = |i: usize| {
        let (name, _, count) = BORCHERDS_TRIPLES[i];
        let done = progress.triples[i].load(Ordering::Relaxed);
        match progress.finished_ms[i].load(Ordering::Relaxed) {
            0 => format!("{done}/{count} {name}"),
            ms => format!("{done}/{count} {name} (done at {:.1}s)", ms as f64 / 1000.0),
        }
    };
    let summary = format!(
        "{} and {} triples, {} instances",
        batch(0),
        batch(1),
        progress.instances.load(Ordering::Relaxed)
    );
    match outcome {
        Ok(Ok(())) => Ok(format!("{summary}, {}", within(start, BORCHERDS_LIMIT)?)),
        Ok(Err(violation)) => Err(format!("violated by {violation} after {summary}")),
        Err(_) => Err(format!(
            "time limit {BORCHERDS_LIMIT:?} reached after {summary}, no violation found"
        )),
    }
}

fn wick_suite(alg: &Algebra, fields: &[NormalForm]) -> Result<usize, String> {
    let e = Engine::new(alg);
    let mut n = 0;
    for a in fields {
        for b in fields {
            for c in fields {
                let left = wick_left(&e, a, b, c).map_err(|x| x.to_string())?;
                let bc = e.nop(b, c).unwrap();
                ensure(left == ope(&e, a, &bc).unwrap(), || {
                    format!("left: {} {} {}", a.render(alg), b.render(alg), c.render(alg))
                })?;
                let right = wick_right(&e, a, b, c).map_err(|x| x.to_string())?;
                let ab = e.nop(a, b).unwrap();
                ensure(right == ope(&e, &ab, c).unwrap(), || {
                    format!("right: {} {} {}", a.render(alg), b.render(alg), c.render(alg))
                })?;
                n += 1;
            }
        }
    }
    Ok(n)
}

fn criterion_7() -> Result<String, String> {
    let vir = virasoro();
    let e = Engine::new(&vir);
    let v = wick_suite(&vir, &[t(), dt(), e.nop(&t(), &t()).unwrap()])?;
    let su2 = su2();
    let e = Engine::new(&su2);
    let mut fields: Vec<NormalForm> = (0..3).flat_map(|a| [j(a), dj(a)]).collect();
    for a in 0..3 {
        for b in 0..3 {
            fields.push(e.nop(&j(a), &j(b)).unwrap());
        }
    }
    let s = wick_suite(&su2, &fields)?;
    Ok(format!("{} triples", v + s))
}

fn skew_pairs(alg: &Algebra, seed: u64, pairs: usize) -> Result<usize, String> {
    let e = Engine::new(alg);
    let n = alg.generators().len();
    let mut checked = 0;
    let mut check = |a: &NormalForm, b: &NormalForm| -> Result<(), String> {
        for m in -3..=4 {
            let direct = e.residue_product(b, m, a).unwrap();
            let skew = e.skew(b, m, a).unwrap();
            ensure(direct == skew, || {
                format!("{}_({m}) {}", b.render(alg), a.render(alg))
            })?;
            checked += 1;
        }
        Ok(())
    };
    for a in 0..n {
        for b in 0..n {
            check(&NormalForm::generator(a), &NormalForm::generator(b))?;
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let e2 = Engine::new(alg);
    for _ in 0..pairs {
        let a = random_field(alg, &e2, &mut rng, 6);
        let b = random_field(alg, &e2, &mut rng, 6);
        check(&a, &b)?;
    }
    Ok(checked)
}

fn criterion_8() -> Result<String, String> {
    let v = skew_pairs(&virasoro(), 8, 100)?;
    let s = skew_pairs(&su2(), 9, 100)?;
    Ok(format!("{} instances", v + s))
}

/// Every residue product appearing in criteria 1 to 5, as (expression,
/// engine normal form).
fn symbolic_products(alg: &Algebra, e: &Engine) -> Vec<(FieldExpr, NormalForm)> {
    let mut out = Vec::new();
    let mut push = |x: FieldExpr| {
        let nf = e.normalize(&x).unwrap();
        out.push((x, nf));
    };
    if alg.generators().len() == 1 {
        let t_ = FieldExpr::Generator(0);
        let tt = nop(t_.clone(), t_.clone());
        for i in 0..=5 {
            push(prod(tt.clone(), i, t_.clone()));
            push(prod(t_.clone(), i, tt.clone()));
        }
        let dt_ = deriv(1, t_.clone());
        push(FieldExpr::Sum(vec![
            (Scalar::one(), nop(t_.clone(), dt_.clone())),
            (scalar(-1), nop(dt_, t_)),
        ]));
    } else {
        let g = FieldExpr::Generator;
        let s = FieldExpr::Sum((0..3).map(|b| (Scalar::one(), nop(g(b), g(b)))).collect());
        let k2 = &alg.param("k").unwrap() + &scalar(2);
        let tt = s.clone().scaled(k2.inv().unwrap());
        for a in 0..3 {
            for i in 0..=1 {
                push(prod(s.clone(), i, g(a)));
                push(prod(g(a), i, tt.clone()));
            }
        }
        for i in 0..=3 {
            push(prod(s.clone(), i, tt.clone()));
        }
    }
    out
}

fn oracle_case(alg: &Algebra, bind: (&str, GaussRat), hw: HighestWeight, cutoff: u32) -> Result<usize, String> {
    let e = Engine::new(alg);
    let b = alg.params().bind([bind.clone()]).map_err(|x| x.to_string())?;
    let m = GradedModule::build(alg, b, hw, cutoff).map_err(|x| x.to_string())?;
    let mut checked = 0;
    for (x, nf) in symbolic_products(alg, &e) {
        let rep = m.verify_against_symbolic(&nf, &x).map_err(|x| x.to_string())?;
        if let Some(mm) = rep.mismatch {
            return Err(format!(
                "{} at {}={}: mode {} on {}: {} vs {}",
                x.render(alg),
                bind.0,
                bind.1,
                mm.n,
                mm.state,
                mm.symbolic,
                mm.direct
            ));
        }
        checked += rep.checked;
    }
    Ok(checked)
}

fn criterion_9() -> Result<String, String> {
    let start = Instant::now();
    let vir = virasoro();
    let su2 = su2();
    let verma = || HighestWeight::Verma(BTreeMap::new());
    let mut n = 0;
    n += oracle_case(&vir, ("c", GaussRat::from_ratio(1, 2)), verma(), 6)?;
    n += oracle_case(&vir, ("c", GaussRat::from_int(26)), verma(), 6)?;
    n += oracle_case(&su2, ("k", GaussRat::from_int(1)), HighestWeight::Vacuum, 4)?;
    n += oracle_case(&su2, ("k", GaussRat::from_int(2)), HighestWeight::Vacuum, 4)?;
    let time = within(start, Duration::from_secs(120))?;
    Ok(format!("{n} matrix columns, {time}"))
}

/// First `terms` coefficients of the power series of `(a0 + a1 u)^(-power)`.
fn series_inverse_power(a0: &BigRational, a1: &BigRational, power: u32, terms: usize) -> Vec<BigRational> {
    let mut inv = Vec::with_capacity(terms);
    let mut coeff = BigRational::one() / a0;
    let ratio = -(a1 / a0);
    for _ in 0..terms {
        inv.push(coeff.clone());
        coeff = &coeff * &ratio;
    }
    let mut acc = vec![BigRational::zero(); terms];
    acc[0] = BigRational::one();
    for _ in 0..power {
        let mut next = vec![BigRational::zero(); terms];
        for (i, x) in acc.iter().enumerate() {
            for (j, y) in inv.iter().enumerate().take(terms - i) {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    acc
}

fn criterion_10() -> Result<String, String> {
    let r = |n: i64| BigRational::from_integer(BigInt::from(n));
    let points = [(r(3), r(1)), (r(-2), BigRational::new(5.into(), 7.into())), (r(11), r(-4))];
    let mut n_checked = 0;
    for m in 1..=6u32 {
        for n in 1..=6u32 {
            let (k, pole) = contour_kernel(m as i64, n as i64).map_err(|x| x.to_string())?;
            let k = k.constant_value().unwrap();
            for (z, w) in &points {
                let d = z - w;
                // About x = w, with u = x - w: (z - x) = d - u. The residue is the
                // u^(n-1) coefficient of (d - u)^(-m).
                let at_w = series_inverse_power(&d, &r(-1), m, n as usize)[n as usize - 1].clone();
                // About x = z, with v = x - z: (z-x)^(-m) = (-1)^m v^(-m) and
                // (x - w) = d + v. Residues sum to zero since m + n >= 2.
                let at_z = series_inverse_power(&d, &r(1), n, m as usize)[m as usize - 1].clone();
                let at_z = if m % 2 == 0 { at_z } else { -at_z };
                ensure(at_w == -at_z.clone(), || format!("residue sum, m = {m}, n = {n}"))?;
                let mut closed = k.re().clone();
                for _ in 0..pole {
                    closed /= &d;
                }
                ensure(k.is_real() && at_w == closed, || {
                    format!("m = {m}, n = {n}: brute force {at_w}, kernel {closed}")
                })?;
                n_checked += 1;
            }
        }
    }
    Ok(format!("{n_checked} evaluations"))
}

fn criterion_11() -> Result<String, String> {
    let mut n = 0;
    let vir = virasoro();
    let e = Engine::new(&vir);
    let su2 = su2();
    let e2 = Engine::new(&su2);
    let vir_fields = vec![t(), dt(), e.nop(&t(), &t()).unwrap()];
    let su2_fields: Vec<NormalForm> = (0..3).map(j).collect();
    for (eng, alg, fields) in [(&e, &vir, vir_fields), (&e2, &su2, su2_fields)] {
        let i = NormalForm::identity();
        for a in &fields {
            for m in 0..=4 {
                ensure(eng.residue_product(a, m, &i).unwrap().is_zero(), || {
                    format!("{}_({m}) I", a.render(alg))
                })?;
                ensure(
                    eng.residue_product(a, -m - 1, &i).unwrap() == eng.derivative(a, m as u32).unwrap(),
                    || format!("{}_({}) I", a.render(alg), -m - 1),
                )?;
                n += 2;
            }
        }
    }
    // also as an instance of the Borcherds identity with C = I
    let s = borcherds_sides(&e, &t(), &t(), &NormalForm::identity(), -1, 0, 2).unwrap();
    ensure(s.holds(), || "Borcherds with C = I".into())?;
    Ok(format!("{n} instances"))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("(TT)(z)T(w) poles via wick_right and engine", criterion_1),
        ("lemma :T dT: - :dT T: = d^(3) T", criterion_2),
        ("Sugawara currents are primary", criterion_3),
        ("Sugawara stress tensor, c = 3k/(k+2)", criterion_4),
        ("J^a(z)T(w) = J^a/(z-w)^2", criterion_5),
        ("Borcherds identity on random triples", criterion_6),
        ("Wick theorems agree with the engine", criterion_7),
        ("skew symmetry", criterion_8),
        ("mode oracle agrees with symbolic products", criterion_9),
        ("contour kernel vs brute-force residues", criterion_10),
        ("identity laws", criterion_11),
    ];
    // the Borcherds suite runs last: on timeout its worker thread is left
    // behind and would otherwise slow down the remaining checks
    let mut order: Vec<usize> = (0..criteria.len()).filter(|&i| i != 5).collect();
    order.push(5);
    let mut lines = vec![String::new(); criteria.len()];
    let mut failed = 0;
    for i in order {
        let (name, check) = criteria[i];
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        lines[i] = match outcome {
            Ok(detail) => format!("criterion {:>2}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                format!("criterion {:>2}: FAIL  {name}: {why}", i + 1)
            }
        };
    }
    for line in &lines {
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
