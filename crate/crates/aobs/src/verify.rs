//! Randomized equivalence suite: belief states acted on as graphs against the
//! same runs in tabular form.
//!
//! Case `seed` draws its shape (|V| ≤ 8, |U| ≤ 4, at most 10 actions) from a
//! ChaCha8 stream on `seed`, then generates its script from `seed` as the
//! benchmark does. After every action it checks the enumeration against the
//! oracle, total mass, normal form, the greedy optimizer and the decision
//! diagram support.

use aobs_core::acting::apply_action;
use aobs_core::bdd::{Bdd, OneHot};
use aobs_core::optimize::{greedy_optimize, DEFAULT_NODE_COST, DEFAULT_THRESHOLD};
use aobs_core::script::{gen_experiment, ExperimentConfig};
use aobs_core::{Store, TabularPbs, PROB_EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const MAX_VARS: u32 = 8;
pub const MAX_VALUES: u32 = 4;
pub const MAX_ACTIONS: u32 = 10;

/// Which check a case failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// An operation returned an error.
    Error,
    /// Enumeration, state count or selected mass differs from the oracle.
    Oracle,
    /// Total mass, normal form or universe after an action.
    Invariant,
    /// Greedy optimization grew the graph or changed its meaning.
    Greedy,
    /// Decision diagram support differs from the oracle support.
    Bdd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFailure {
    pub seed: u64,
    pub step: u32,
    pub check: Check,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseStats {
    pub steps: u32,
    pub greedy_runs: u32,
    pub max_states: u128,
}

pub fn case_config(seed: u64) -> ExperimentConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_vars = rng.random_range(1..=MAX_VARS);
    ExperimentConfig {
        num_vars,
        num_values: rng.random_range(2..=MAX_VALUES),
        num_actions: rng.random_range(0..=MAX_ACTIONS),
        effects_per_action: rng.random_range(1..=3),
        assigns_per_effect: rng.random_range(1..=num_vars.min(3)),
        condition_arity: rng.random_range(0..=num_vars.min(3)),
        oracle_cap: usize::MAX,
        with_bdd: true,
        optimize: true,
    }
}

/// Runs one case. `inject_fault` corrupts the first comparison, as a negative
/// control for the checker itself.
pub fn verify_case(seed: u64, inject_fault: bool) -> Result<CaseStats, CaseFailure> {
    let cfg = case_config(seed);
    let fail = |step: u32, check: Check, detail: String| CaseFailure {
        seed,
        step,
        check,
        detail,
    };
    let core = |step: u32| {
        move |e: aobs_core::Error| CaseFailure {
            seed,
            step,
            check: Check::Error,
            detail: e.to_string(),
        }
    };

    let script = gen_experiment(&cfg, seed).map_err(core(0))?;
    let mut store = Store::new().with_expansion_cap(usize::MAX);
    let mut s = store.from_physical_state(&script.initial, &cfg.universe()).map_err(core(0))?;
    let mut oracle = TabularPbs::certain(script.initial.clone());
    let enc = OneHot::new(cfg.num_values);
    let mut bdd = Bdd::new();
    let mut support = enc.encode_state(&mut bdd, &script.initial).map_err(core(0))?;
    let mut stats = CaseStats::default();

    let mut got = store.enumerate_states(s.root).map_err(core(0))?.canonical();
    if inject_fault {
        let mut rows = got.into_rows();
        rows[0].0 *= 0.5;
        got = TabularPbs::from_rows(rows);
    }
    if !got.approx_eq(&oracle, PROB_EPS) {
        return Err(fail(0, Check::Oracle, "initial state differs from oracle".into()));
    }

    for (i, (c, a)) in script.steps.iter().enumerate() {
        let step = i as u32 + 1;
        let expect_mass = oracle.prob(c).map_err(core(step))?;
        let acted = apply_action(&mut store, &s, c, a).map_err(core(step))?;
        oracle = oracle.apply_action(c, a).map_err(core(step))?;
        s = acted.state;

        if (acted.selected_mass - expect_mass).abs() > PROB_EPS {
            return Err(fail(step, Check::Oracle, format!("selected mass {} != {}", acted.selected_mass, expect_mass)));
        }
        let mass = store.mass(s.root);
        if (mass - 1.0).abs() > PROB_EPS {
            return Err(fail(step, Check::Invariant, format!("total mass {mass}")));
        }
        if let Some(n) = store.normal_form_violation(s.root) {
            return Err(fail(step, Check::Invariant, format!("normal form violated at {n:?}")));
        }
        if s.universe != cfg.universe() {
            return Err(fail(step, Check::Invariant, "universe changed".into()));
        }
        let got = store.enumerate_states(s.root).map_err(core(step))?;
        if store.count_states(s.root) != got.len() as u128 {
            return Err(fail(step, Check::Oracle, "count_states disagrees with enumeration".into()));
        }
        if !got.canonical().approx_eq(&oracle, PROB_EPS) {
            return Err(fail(step, Check::Oracle, "enumeration differs from oracle".into()));
        }
        stats.max_states = stats.max_states.max(got.len() as u128);

        let before = store.size_metric(s.root);
        let opt = greedy_optimize(&mut store, &s, DEFAULT_NODE_COST, DEFAULT_THRESHOLD).map_err(core(step))?;
        if store.size_metric(opt.root) > before {
            return Err(fail(step, Check::Greedy, format!("greedy grew size {before} -> {}", store.size_metric(opt.root))));
        }
        let got = store.enumerate_states(opt.root).map_err(core(step))?.canonical();
        if !got.approx_eq(&oracle, PROB_EPS) {
            return Err(fail(step, Check::Greedy, "greedy changed the belief state".into()));
        }
        stats.greedy_runs += 1;
        s = opt;

        let bc = enc.encode_condition(&mut bdd, c).map_err(core(step))?;
        let ba = enc.encode_action(&mut bdd, a).map_err(core(step))?;
        support = bdd.apply_action(support, bc, ba, &enc.action_bools(a));
        let expect = enc.encode_support(&mut bdd, &oracle.support()).map_err(core(step))?;
        if support != expect {
            return Err(fail(step, Check::Bdd, "decision diagram support differs from oracle".into()));
        }
        stats.steps = step;
    }
    Ok(stats)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub cases: u64,
    pub passed: u64,
    pub steps: u64,
    /// Sorted by seed.
    pub failures: Vec<CaseFailure>,
}

impl VerifyReport {
    pub fn failed(&self, check: Check) -> usize {
        self.failures.iter().filter(|f| f.check == check).count()
    }
}

/// Runs seeds `first..first + cases` in parallel.
pub fn verify_suite(first: u64, cases: u64, inject_fault: bool) -> VerifyReport {
    let results: Vec<Result<CaseStats, CaseFailure>> = (first..first + cases)
        .into_par_iter()
        .map(|seed| verify_case(seed, inject_fault))
        .collect();
    let mut report = VerifyReport {
        cases,
        ..VerifyReport::default()
    };
    for r in results {
        match r {
            Ok(st) => {
                report.passed += 1;
                report.steps += u64::from(st.steps);
            }
            Err(f) => report.failures.push(f),
        }
    }
    report
}
