//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use aobs::analysis::{fit_rows, summarize_compression, StepSummary};
use aobs::bench::{run_seeds, MetricsRow};
use aobs::verify::{verify_suite, Check, VerifyReport};
use aobs_core::acting::{apply_action, normalize};
use aobs_core::bdd::{Bdd, BddRef};
use aobs_core::optimize::{greedy_optimize, DEFAULT_NODE_COST, DEFAULT_THRESHOLD};
use aobs_core::query::probability;
use aobs_core::script::ExperimentConfig;
use aobs_core::{Action, Condition, PhysicalState, Store, TabularPbs, VarId, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, name, pass, detail }
}

fn table_three() -> Verdict {
    let mut st = Store::new();
    let u = VarSet::full(3);
    let r0 = st.from_physical_state(&PhysicalState::from_values(&[0, 0, 0]), &u).unwrap();
    let r1 = st.from_physical_state(&PhysicalState::from_values(&[0, 1, 0]), &u).unwrap();
    let s = st.union_roots(&r0, &r1, 0.4).unwrap();
    let a = Action::new(vec![VarId(1), VarId(2)], vec![(0.7, vec![2, 1]), (0.3, vec![2, 0])]).unwrap();
    let c = Condition::always();

    let t = Instant::now();
    let out = apply_action(&mut st, &s, &c, &a).unwrap();
    let elapsed = t.elapsed();

    let got = st.enumerate_states(out.state.root).unwrap().canonical();
    let expect = TabularPbs::from_rows(vec![
        (0.7, PhysicalState::from_values(&[0, 2, 1])),
        (0.3, PhysicalState::from_values(&[0, 2, 0])),
    ])
    .canonical();
    let exact = got.approx_eq(&expect, 1e-9);
    verdict(
        1,
        "two-state action example",
        exact && elapsed < Duration::from_millis(1),
        format!("rows {:?}, apply_action took {:?}", got.rows(), elapsed),
    )
}

fn table_one() -> Verdict {
    let mut st = Store::new();
    let u = VarSet::full(3);
    let rows = [(0.12, [0, 0, 0]), (0.28, [0, 0, 1]), (0.42, [0, 1, 0]), (0.18, [0, 1, 1])];
    let mut acc = st.from_physical_state(&PhysicalState::from_values(&rows[0].1), &u).unwrap();
    let mut mass = rows[0].0;
    for (p, values) in &rows[1..] {
        let s = st.from_physical_state(&PhysicalState::from_values(values), &u).unwrap();
        acc = st.union_roots(&acc, &s, mass / (mass + p)).unwrap();
        mass += p;
    }
    let s = normalize(&mut st, &acc).unwrap();
    let s = greedy_optimize(&mut st, &s, DEFAULT_NODE_COST, DEFAULT_THRESHOLD).unwrap();
    let c = Condition::always().with(VarId(1), [1]).unwrap().with(VarId(2), [0]).unwrap();
    let p = probability(&st, &s, &c).unwrap();
    verdict(2, "marginal P(b=1, c=0) = 0.42", (p - 0.42).abs() <= 1e-9, format!("P = {p:.12}"))
}

fn from_suite(report: &VerifyReport, elapsed: Duration) -> Vec<Verdict> {
    let errors = report.failed(Check::Error);
    let first = report
        .failures
        .first()
        .map(|f| format!("; first failure seed {} step {}: {}", f.seed, f.step, f.detail))
        .unwrap_or_default();
    let count = |c: Check| report.failed(c) + errors;
    vec![
        verdict(
            3,
            "oracle equivalence on 1000 random runs",
            count(Check::Oracle) == 0 && report.passed == report.cases && elapsed < Duration::from_secs(60),
            format!("{}/{} ok, {} actions, {:?}{first}", report.passed, report.cases, report.steps, elapsed),
        ),
        verdict(
            4,
            "mass and normal form after every action",
            count(Check::Invariant) == 0,
            format!("{} violations over {} actions", report.failed(Check::Invariant), report.steps),
        ),
        verdict(
            8,
            "greedy never grows size and keeps semantics",
            count(Check::Greedy) == 0,
            format!("{} failures over {} optimizer runs", report.failed(Check::Greedy), report.steps),
        ),
    ]
}

fn config(vars: u32, values: u32, actions: u32, with_bdd: bool) -> ExperimentConfig {
    ExperimentConfig {
        num_vars: vars,
        num_values: values,
        num_actions: actions,
        with_bdd,
        ..ExperimentConfig::default()
    }
}

fn last(rows: &[MetricsRow]) -> StepSummary {
    summarize_compression(rows).pop().expect("rows are not empty")
}

fn scaling() -> Verdict {
    let mut detail = Vec::new();
    let mut pass = true;
    for (values, target) in [(2, 0.6), (8, 0.3)] {
        let rows = run_seeds(&config(30, values, 35, false), 50).unwrap();
        match fit_rows(&rows) {
            Ok(k) => {
                pass &= (k - target).abs() <= 0.15;
                detail.push(format!("|U|={values}: slope {k:.3} (target {target} ± 0.15)"));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("|U|={values}: {e}"));
            }
        }
    }
    verdict(5, "scaling exponents, 50 seeds", pass, detail.join("; "))
}

fn bdd_comparison(wide: &[MetricsRow]) -> Verdict {
    let rows = run_seeds(&config(40, 8, 20, true), 30).unwrap();
    let mut detail = Vec::new();
    let mut pass = true;
    for (label, rows) in [("|V|=40 |U|=8, 30 seeds", &rows[..]), ("|V|=50 |U|=4, 200 seeds", wide)] {
        let s = last(rows);
        let bdd = s.mean_n_bdd.unwrap();
        pass &= s.mean_n_aobs < bdd;
        detail.push(format!(
            "{label}: mean n_aobs {:.1} vs n_bdd {:.1} (ratio {:.1})",
            s.mean_n_aobs,
            bdd,
            bdd / s.mean_n_aobs
        ));
    }
    verdict(6, "graph smaller than decision diagram", pass, detail.join("; "))
}

fn compression(wide: &[MetricsRow]) -> Verdict {
    let s = last(wide);
    let best = wide
        .iter()
        .filter(|r| r.step == s.step)
        .map(MetricsRow::compression)
        .fold(0.0, f64::max);
    verdict(
        7,
        "mean compression above 100 at |V|=50",
        s.compression_aobs > 100.0,
        format!(
            "mean n_naive/n_aobs after {} actions {:.2} over {} seeds (best seed {:.1}, decision diagram {:.2})",
            s.step,
            s.compression_aobs,
            s.seeds,
            best,
            s.compression_bdd.unwrap()
        ),
    )
}

const MAX_BITS: u32 = 12;
const WORDS: usize = 1 << (MAX_BITS - 6);

type Table = [u64; WORDS];

enum Formula {
    Var(u32),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

fn random_formula(rng: &mut ChaCha8Rng, vars: u32, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.15) {
        return Formula::Var(rng.random_range(0..vars));
    }
    let op = rng.random_range(0..5);
    let mut sub = || Box::new(random_formula(rng, vars, depth - 1));
    match op {
        0 => Formula::Not(sub()),
        1 | 2 => Formula::And(sub(), sub()),
        _ => Formula::Or(sub(), sub()),
    }
}

fn eval(f: &Formula, bits: u32) -> bool {
    match f {
        Formula::Var(i) => bits >> i & 1 == 1,
        Formula::Not(g) => !eval(g, bits),
        Formula::And(a, b) => eval(a, bits) && eval(b, bits),
        Formula::Or(a, b) => eval(a, bits) || eval(b, bits),
    }
}

fn build(f: &Formula, bdd: &mut Bdd) -> BddRef {
    match f {
        Formula::Var(i) => bdd.var(*i),
        Formula::Not(g) => {
            let x = build(g, bdd);
            bdd.not(x)
        }
        Formula::And(a, b) => {
            let (x, y) = (build(a, bdd), build(b, bdd));
            bdd.and(x, y)
        }
        Formula::Or(a, b) => {
            let (x, y) = (build(a, bdd), build(b, bdd));
            bdd.or(x, y)
        }
    }
}

fn bit(t: &Table, i: u32) -> bool {
    t[(i >> 6) as usize] >> (i & 63) & 1 == 1
}

/// Shannon expansion of a truth table, top variable first.
fn from_table(t: &Table, bdd: &mut Bdd, var: u32, base: u32) -> BddRef {
    if var == MAX_BITS {
        return if bit(t, base) { BddRef::TRUE } else { BddRef::FALSE };
    }
    let lo = from_table(t, bdd, var + 1, base);
    let hi = from_table(t, bdd, var + 1, base | 1 << var);
    let x = bdd.var(var);
    let nx = bdd.not(x);
    let a = bdd.and(nx, lo);
    let b = bdd.and(x, hi);
    bdd.or(a, b)
}

fn canonicity() -> (usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bdd);
    let mut bdd = Bdd::new();
    let mut seen: Vec<(Table, BddRef)> = Vec::new();
    let (mut equal_pairs, mut mismatches, mut rebuild_failures) = (0, 0, 0);
    for _ in 0..500 {
        let vars = rng.random_range(1..=MAX_BITS);
        let depth = rng.random_range(1..=7);
        let f = random_formula(&mut rng, vars, depth);
        let mut t: Table = [0; WORDS];
        for bits in 0..1u32 << MAX_BITS {
            if eval(&f, bits) {
                t[(bits >> 6) as usize] |= 1 << (bits & 63);
            }
        }
        let r = build(&f, &mut bdd);
        if from_table(&t, &mut bdd, 0, 0) != r {
            rebuild_failures += 1;
        }
        for (u, q) in &seen {
            let same_table = *u == t;
            equal_pairs += usize::from(same_table);
            if same_table != (*q == r) {
                mismatches += 1;
            }
        }
        seen.push((t, r));
    }
    (equal_pairs, mismatches, rebuild_failures)
}

fn bdd_canonicity(report: &VerifyReport) -> Verdict {
    let (equal_pairs, mismatches, rebuild_failures) = canonicity();
    let support = report.failed(Check::Bdd) + report.failed(Check::Error);
    verdict(
        9,
        "decision diagram canonicity and support",
        mismatches == 0 && rebuild_failures == 0 && support == 0,
        format!(
            "500 functions: {equal_pairs} equal pairs, {mismatches} ref/table disagreements, \
             {rebuild_failures} truth-table rebuild mismatches; support mismatches on random runs: {support}"
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut results = vec![table_three(), table_one()];

    let t = Instant::now();
    let report = verify_suite(0, 1000, false);
    results.extend(from_suite(&report, t.elapsed()));

    results.push(scaling());
    let wide = run_seeds(&config(50, 4, 20, true), 200).unwrap();
    results.push(bdd_comparison(&wide));
    results.push(compression(&wide));
    results.push(bdd_canonicity(&report));
    results.sort_by_key(|v| v.id);

    for v in &results {
        println!("{} [{}] {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.name, v.detail);
    }
    let failed = results.iter().filter(|v| !v.pass).count();
    println!("{} passed, {failed} failed ({:?})", results.len() - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
