//! Random belief-state trees and a brute-force expansion of them that does
//! not go through the store.

#![allow(dead_code)]

use std::collections::BTreeMap;

use aobs_core::{Aobs, Action, Condition, PhysicalState, Store, TabularPbs, VarId, VarSet};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub enum Tree {
    Lit(u32, i64),
    And(Vec<Tree>),
    Or(Vec<(f64, Tree)>),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree over exactly `vars`, with values in `0..nv`.
pub fn gen_tree(rng: &mut ChaCha8Rng, vars: &[u32], nv: i64, depth: u32) -> Tree {
    if vars.len() == 1 && (depth == 0 || rng.random_bool(0.5)) {
        let v = vars[0];
        if nv < 2 || rng.random_bool(0.5) {
            return Tree::Lit(v, rng.random_range(0..nv));
        }
        let k = rng.random_range(2..=nv as usize);
        let values = index::sample(rng, nv as usize, k).into_vec();
        return Tree::Or(weights(rng, k).into_iter().zip(values).map(|(w, u)| (w, Tree::Lit(v, u as i64))).collect());
    }
    if depth == 0 {
        return Tree::And(vars.iter().map(|&v| gen_tree(rng, &[v], nv, 0)).collect());
    }
    if vars.len() >= 2 && rng.random_bool(0.6) {
        let parts = rng.random_range(2..=vars.len().min(3));
        let mut buckets = vec![Vec::new(); parts];
        for (i, &v) in vars.iter().enumerate() {
            // every bucket gets at least one variable
            let b = if i < parts { i } else { rng.random_range(0..parts) };
            buckets[b].push(v);
        }
        Tree::And(buckets.iter().map(|b| gen_tree(rng, b, nv, depth - 1)).collect())
    } else {
        let k = rng.random_range(2..=3);
        let ws = weights(rng, k);
        Tree::Or(ws.into_iter().map(|w| (w, gen_tree(rng, vars, nv, depth - 1))).collect())
    }
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn build(store: &mut Store, t: &Tree) -> aobs_core::NodeRef {
    match t {
        Tree::Lit(v, u) => store.make_lit(VarId(*v), *u),
        Tree::And(c) => {
            let kids: Vec<_> = c.iter().map(|k| build(store, k)).collect();
            store.make_and(kids).unwrap()
        }
        Tree::Or(e) => {
            let edges: Vec<_> = e.iter().map(|(w, k)| (*w, build(store, k))).collect();
            store.make_or(edges).unwrap()
        }
    }
}

pub fn build_aobs(store: &mut Store, t: &Tree) -> Aobs {
    let r = build(store, t);
    Aobs::new(store, r)
}

pub fn expand(t: &Tree) -> Vec<(f64, BTreeMap<u32, i64>)> {
    match t {
        Tree::Lit(v, u) => vec![(1.0, BTreeMap::from([(*v, *u)]))],
        Tree::And(c) => c.iter().fold(vec![(1.0, BTreeMap::new())], |acc, k| {
            let part = expand(k);
            let mut out = Vec::new();
            for (p, s) in &acc {
                for (q, t) in &part {
                    let mut m = s.clone();
                    m.extend(t.iter().map(|(a, b)| (*a, *b)));
                    out.push((p * q, m));
                }
            }
            out
        }),
        Tree::Or(e) => e
            .iter()
            .flat_map(|(w, k)| expand(k).into_iter().map(move |(p, s)| (w * p, s)))
            .collect(),
    }
}

pub fn tree_pbs(t: &Tree) -> TabularPbs {
    let rows = expand(t)
        .into_iter()
        .map(|(p, m)| (p, PhysicalState::from_pairs(m.into_iter().map(|(v, u)| (VarId(v), u)))))
        .collect();
    TabularPbs::from_rows(rows).canonical()
}

pub fn random_condition(rng: &mut ChaCha8Rng, n: u32, nv: i64, arity: usize) -> Condition {
    let mut c = Condition::always();
    for v in index::sample(rng, n as usize, arity.min(n as usize)) {
        let allowed: Vec<i64> = (0..nv).filter(|_| rng.random_bool(0.5)).collect();
        let allowed = if allowed.is_empty() { vec![rng.random_range(0..nv)] } else { allowed };
        c = c.with(VarId(v as u32), allowed).unwrap();
    }
    c
}

pub fn random_action(rng: &mut ChaCha8Rng, n: u32, nv: i64) -> Action {
    let k = rng.random_range(1..=n.min(3) as usize);
    let mut vars = index::sample(rng, n as usize, k).into_vec();
    vars.sort_unstable();
    let outcomes = rng.random_range(1..=3);
    let ws = weights(rng, outcomes);
    Action::new(
        vars.iter().map(|&v| VarId(v as u32)).collect(),
        ws.into_iter()
            .map(|w| (w, vars.iter().map(|_| rng.random_range(0..nv)).collect()))
            .collect(),
    )
    .unwrap()
}

pub fn all_vars(n: u32) -> Vec<u32> {
    (0..n).collect()
}

pub fn universe(n: u32) -> VarSet {
    VarSet::full(n as usize)
}

pub fn assert_same(a: &TabularPbs, b: &TabularPbs) {
    assert!(a.canonical().approx_eq(&b.canonical(), 1e-9), "{a:?}\n!=\n{b:?}");
}
