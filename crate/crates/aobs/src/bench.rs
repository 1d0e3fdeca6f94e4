//! Simulated random policy exploration with per-step size metrics.
//!
//! Each seed runs in its own store and decision-diagram manager, so seeds
//! are processed in parallel and merged back in seed order.

use std::time::Instant;

use aobs_core::acting::apply_action;
use aobs_core::bdd::{Bdd, BddRef, OneHot};
use aobs_core::optimize::{greedy_optimize, DEFAULT_NODE_COST, DEFAULT_THRESHOLD};
use aobs_core::script::{gen_experiment, ExperimentConfig, ExperimentScript};
use aobs_core::{Store, TabularPbs};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] aobs_core::Error),
    #[error("oracle mismatch at seed {seed}, step {step}")]
    OracleMismatch { seed: u64, step: u32 },
}

/// Metrics after `step` actions of one seed. Step 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub seed: u64,
    pub step: u32,
    /// Number of weighted states, repeats included.
    pub n_states: u128,
    /// `|V| · n_states`
    pub n_naive: u128,
    pub n_aobs: u64,
    pub n_bdd: Option<u64>,
    pub ms_aobs: f64,
    pub ms_bdd: Option<f64>,
}

impl MetricsRow {
    pub fn compression(&self) -> f64 {
        self.n_naive as f64 / self.n_aobs as f64
    }

    pub fn bdd_compression(&self) -> Option<f64> {
        self.n_bdd.map(|b| self.n_naive as f64 / b.max(1) as f64)
    }
}

struct BddTrack {
    enc: OneHot,
    mgr: Bdd,
    support: BddRef,
}

/// Runs `script` and records one row per step, comparing against the tabular
/// oracle while the state count stays within `cfg.oracle_cap`.
pub fn run_experiment(script: &ExperimentScript, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<MetricsRow>, BenchError> {
    let universe = cfg.universe();
    let n_vars = universe.len() as u128;
    let mut store = Store::new().with_expansion_cap(cfg.oracle_cap.max(1));
    let mut s = store.from_physical_state(&script.initial, &universe)?;
    let mut oracle = Some(TabularPbs::certain(script.initial.clone()));
    let mut bdd = if cfg.with_bdd {
        let enc = OneHot::new(cfg.num_values);
        let mut mgr = Bdd::new();
        let support = enc.encode_state(&mut mgr, &script.initial)?;
        Some(BddTrack { enc, mgr, support })
    } else {
        None
    };

    let mut rows = Vec::with_capacity(script.steps.len() + 1);
    let mut record = |store: &Store, root, step, ms_aobs, bdd: &Option<BddTrack>, ms_bdd| {
        let n_states = store.count_states(root);
        rows.push(MetricsRow {
            seed,
            step,
            n_states,
            n_naive: n_vars.saturating_mul(n_states),
            n_aobs: store.size_metric(root),
            n_bdd: bdd.as_ref().map(|b| b.mgr.size(b.support) as u64),
            ms_aobs,
            ms_bdd,
        });
        n_states
    };
    record(&store, s.root, 0, 0.0, &bdd, bdd.as_ref().map(|_| 0.0));

    for (i, (c, a)) in script.steps.iter().enumerate() {
        let step = i as u32 + 1;
        let t = Instant::now();
        s = apply_action(&mut store, &s, c, a)?.state;
        if cfg.optimize {
            s = greedy_optimize(&mut store, &s, DEFAULT_NODE_COST, DEFAULT_THRESHOLD)?;
        }
        let ms_aobs = ms(t);

        let ms_bdd = match bdd.as_mut() {
            Some(b) => {
                let t = Instant::now();
                let bc = b.enc.encode_condition(&mut b.mgr, c)?;
                let ba = b.enc.encode_action(&mut b.mgr, a)?;
                b.support = b.mgr.apply_action(b.support, bc, ba, &b.enc.action_bools(a));
                b.mgr.clear_caches();
                Some(ms(t))
            }
            None => None,
        };

        let n_states = record(&store, s.root, step, ms_aobs, &bdd, ms_bdd);
        if let Some(o) = oracle.take() {
            let next = o.apply_action(c, a)?;
            if n_states <= cfg.oracle_cap as u128 {
                let got = store.enumerate_states(s.root)?.canonical();
                if !got.approx_eq(&next, aobs_core::PROB_EPS) {
                    return Err(BenchError::OracleMismatch { seed, step });
                }
                if let Some(b) = bdd.as_mut() {
                    let expect = b.enc.encode_support(&mut b.mgr, &next.support())?;
                    if expect != b.support {
                        return Err(BenchError::OracleMismatch { seed, step });
                    }
                }
                oracle = Some(next);
            }
        }
    }
    Ok(rows)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs seeds `0..seeds` in parallel; rows come back ordered by seed, then step.
pub fn run_seeds(cfg: &ExperimentConfig, seeds: u64) -> Result<Vec<MetricsRow>, BenchError> {
    let per_seed: Vec<Vec<MetricsRow>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let script = gen_experiment(cfg, seed)?;
            run_experiment(&script, cfg, seed)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}
