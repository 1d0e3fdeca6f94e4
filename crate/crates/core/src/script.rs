//! Random policy-exploration scripts: a starting physical state followed by
//! a sequence of (condition, action) pairs.
//!
//! All randomness comes from one ChaCha8 stream seeded with the 64-bit
//! experiment seed, so a (config, seed) pair fixes the script on every
//! platform.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::var::{Action, Condition, PhysicalState, Value, VarId, VarSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    /// |V|
    pub num_vars: u32,
    /// |U|: every variable takes values in `0..num_values`.
    pub num_values: u32,
    pub num_actions: u32,
    /// Outcomes per action.
    pub effects_per_action: u32,
    /// Variables written by each action.
    pub assigns_per_effect: u32,
    /// Variables constrained by each action's condition.
    pub condition_arity: u32,
    /// Largest state count for which the tabular oracle runs alongside.
    pub oracle_cap: usize,
    pub with_bdd: bool,
    /// Run the greedy optimizer after every action.
    pub optimize: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_vars: 30,
            num_values: 2,
            num_actions: 35,
            effects_per_action: 3,
            assigns_per_effect: 3,
            condition_arity: 3,
            oracle_cap: 10_000,
            with_bdd: false,
            optimize: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 || self.num_values == 0 {
            return Err(Error::InvalidConfig("need at least one variable and one value"));
        }
        if self.effects_per_action == 0 || self.assigns_per_effect == 0 {
            return Err(Error::InvalidConfig("actions need outcomes and assignments"));
        }
        if self.assigns_per_effect > self.num_vars {
            return Err(Error::InvalidConfig("more assignments than variables"));
        }
        if self.condition_arity > self.num_vars {
            return Err(Error::InvalidConfig("condition arity exceeds variable count"));
        }
        if self.condition_arity > 0 && self.num_values < 2 {
            return Err(Error::InvalidConfig(
                "conditions need at least two values per variable",
            ));
        }
        Ok(())
    }

    pub fn universe(&self) -> VarSet {
        VarSet::full(self.num_vars as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentScript {
    pub initial: PhysicalState,
    pub steps: Vec<(Condition, Action)>,
}

pub fn gen_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentScript> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.num_vars as usize;
    let values = i64::from(cfg.num_values);

    let initial: Vec<Value> = (0..n).map(|_| rng.random_range(0..values)).collect();
    let initial = PhysicalState::from_values(&initial);

    let mut steps = Vec::with_capacity(cfg.num_actions as usize);
    for _ in 0..cfg.num_actions {
        let cond = random_condition(&mut rng, cfg);
        let action = random_action(&mut rng, cfg);
        steps.push((cond, action));
    }
    Ok(ExperimentScript { initial, steps })
}

fn random_condition(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> Condition {
    let mut vars = index::sample(rng, cfg.num_vars as usize, cfg.condition_arity as usize).into_vec();
    vars.sort_unstable();
    let mut c = Condition::always();
    for v in vars {
        let allowed = loop {
            let set: Vec<Value> = (0..i64::from(cfg.num_values))
                .filter(|_| rng.random_bool(0.5))
                .collect();
            if !set.is_empty() && set.len() < cfg.num_values as usize {
                break set;
            }
        };
        c = c
            .with(VarId(v as u32), allowed)
            .expect("allowed set is non-empty");
    }
    c
}

fn random_action(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> Action {
    let mut vars = index::sample(rng, cfg.num_vars as usize, cfg.assigns_per_effect as usize).into_vec();
    vars.sort_unstable();
    let vars: Vec<VarId> = vars.into_iter().map(|v| VarId(v as u32)).collect();
    let values = i64::from(cfg.num_values);
    let raw: Vec<(f64, Vec<Value>)> = (0..cfg.effects_per_action)
        .map(|_| {
            // (0, 1]
            let p = 1.0 - rng.random::<f64>();
            let vals = vars.iter().map(|_| rng.random_range(0..values)).collect();
            (p, vals)
        })
        .collect();
    let total: f64 = raw.iter().map(|(p, _)| p).sum();
    let outcomes = raw.into_iter().map(|(p, v)| (p / total, v)).collect();
    Action::new(vars, outcomes).expect("generated action is valid")
}
