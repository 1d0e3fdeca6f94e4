//! Inference over a belief state: probability of a condition and the
//! substate it selects.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::oracle::TabularPbs;
use crate::store::{node_map, Aobs, Node, NodeMap, NodeRef, Store};
use crate::var::{Condition, PhysicalState};
use crate::PROB_EPS;

/// Probability that `c` holds on `s`. Each shared node is evaluated once.
pub fn probability(store: &Store, s: &Aobs, c: &Condition) -> Result<f64> {
    c.check_within(&s.universe)?;
    let p = node_probability(store, s.root, c);
    Ok(if p > 1.0 && p <= 1.0 + PROB_EPS { 1.0 } else { p.max(0.0) })
}

pub(crate) fn node_probability(store: &Store, root: NodeRef, c: &Condition) -> f64 {
    let mut memo: NodeMap<f64> = node_map();
    for n in store.reachable(root) {
        let p = match store.node(n) {
            Node::Lit { var, value } => {
                if c.allows(*var, *value) {
                    1.0
                } else {
                    0.0
                }
            }
            Node::And(ch) => ch.iter().map(|k| memo[k]).product(),
            Node::Or(e) => e.iter().map(|(w, k)| w * memo[k]).sum(),
        };
        memo.insert(n, p);
    }
    memo[&root]
}

/// The states of `s` satisfying `c` with their (unnormalized) masses, in
/// canonical order.
pub fn select_substate(store: &Store, s: &Aobs, c: &Condition) -> Result<TabularPbs> {
    c.check_within(&s.universe)?;
    let cap = store.expansion_cap();
    let mut memo = node_map();
    let rows = select_rec(store, s.root, c, cap, &mut memo)?;
    Ok(TabularPbs::from_rows(rows).canonical())
}

type Rows = Vec<(f64, PhysicalState)>;

fn select_rec(
    store: &Store,
    n: NodeRef,
    c: &Condition,
    cap: usize,
    memo: &mut NodeMap<Rows>,
) -> Result<Rows> {
    if let Some(r) = memo.get(&n) {
        return Ok(r.clone());
    }
    let rows: Rows = match store.node(n) {
        Node::Lit { var, value } => {
            if c.allows(*var, *value) {
                alloc::vec![(1.0, PhysicalState::from_pairs([(*var, *value)]))]
            } else {
                Vec::new()
            }
        }
        Node::And(ch) => {
            let mut acc = alloc::vec![(1.0, PhysicalState::new())];
            for &k in ch {
                let part = select_rec(store, k, c, cap, memo)?;
                if part.is_empty() {
                    acc.clear();
                    break;
                }
                if acc.len().saturating_mul(part.len()) > cap {
                    return Err(Error::ExpansionTooLarge { cap });
                }
                acc = acc
                    .iter()
                    .flat_map(|(p, s)| part.iter().map(move |(q, t)| (p * q, s.product(t))))
                    .collect();
            }
            acc
        }
        Node::Or(e) => {
            let mut acc = Vec::new();
            for &(w, k) in e {
                let part = select_rec(store, k, c, cap, memo)?;
                acc.extend(part.into_iter().map(|(p, s)| (w * p, s)));
                if acc.len() > cap {
                    return Err(Error::ExpansionTooLarge { cap });
                }
            }
            acc
        }
    };
    memo.insert(n, rows.clone());
    Ok(rows)
}
