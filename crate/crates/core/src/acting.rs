//! Applying a probabilistic, state-independent action to the part of a belief
//! state selected by a condition, directly on the DAG.
//!
//! The pipeline:
//!
//! 1. label every node included / excluded / mixed with respect to the
//!    condition,
//! 2. find the minimal subgraphs whose variables cover both the action and
//!    the condition and which contain a satisfying state,
//! 3. isolate mixed minimal subgraphs into an OR of purely included and
//!    purely excluded parts,
//! 4. on every included part, marginalize out the action variables and take
//!    the product with the action's outcome distribution,
//! 5. rebuild the ancestors and normalize.
//!
//! A minimal subgraph covers every constrained variable, so whether one of
//! its states is selected does not depend on the path it is reached by. That
//! makes it safe to rewrite a shared minimal subgraph once for all of its
//! parents.

use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};
use crate::query::node_probability;
use crate::store::{node_map, Aobs, Node, NodeMap, NodeRef, Store};
use crate::var::{Action, Condition, VarSet};
use crate::PROB_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Every state of the substate satisfies the condition.
    Included,
    /// No state does.
    Excluded,
    Mixed,
}

/// Per-node labels for one condition, covering the whole reachable graph.
#[derive(Debug, Clone, Default)]
pub struct LabelMap(NodeMap<Label>);

impl LabelMap {
    pub fn get(&self, r: NodeRef) -> Option<Label> {
        self.0.get(&r).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeRef, Label)> + '_ {
        self.0.iter().map(|(&r, &l)| (r, l))
    }
}

impl Index<NodeRef> for LabelMap {
    type Output = Label;

    fn index(&self, r: NodeRef) -> &Label {
        &self.0[&r]
    }
}

/// Labels every node reachable from `root`, each exactly once.
pub fn label_nodes(store: &Store, root: NodeRef, c: &Condition) -> Result<LabelMap> {
    c.check_within(store.omega(root))?;
    let mut labels = node_map();
    for n in store.reachable(root) {
        let l = match store.node(n) {
            Node::Lit { var, value } => {
                if c.allows(*var, *value) {
                    Label::Included
                } else {
                    Label::Excluded
                }
            }
            Node::And(ch) => {
                let mut out = Label::Included;
                for k in ch {
                    match labels[k] {
                        Label::Excluded => {
                            out = Label::Excluded;
                            break;
                        }
                        Label::Mixed => out = Label::Mixed,
                        Label::Included => {}
                    }
                }
                out
            }
            Node::Or(e) => {
                let inc = e.iter().any(|(_, k)| labels[k] != Label::Excluded);
                let exc = e.iter().any(|(_, k)| labels[k] != Label::Included);
                match (inc, exc) {
                    (true, true) => Label::Mixed,
                    (true, false) => Label::Included,
                    _ => Label::Excluded,
                }
            }
        };
        labels.insert(n, l);
    }
    Ok(LabelMap(labels))
}

/// Minimal subgraphs for acting on `avars` under `c`: nodes containing a
/// satisfying state whose variables cover `avars ∪ Ω(c)`, none of whose
/// children do. Unique, in discovery order; empty when nothing satisfies `c`.
pub fn find_minimal_subgraphs(
    store: &Store,
    root: NodeRef,
    c: &Condition,
    avars: &VarSet,
    labels: &LabelMap,
) -> Vec<NodeRef> {
    let target = avars.union(&c.vars());
    let mut found = Vec::new();
    if labels[root] == Label::Excluded || !target.is_subset(store.omega(root)) {
        return found;
    }
    let mut seen = node_map::<()>();
    let mut stack = alloc::vec![root];
    while let Some(n) = stack.pop() {
        if seen.insert(n, ()).is_some() {
            continue;
        }
        match store.node(n) {
            Node::Lit { .. } => found.push(n),
            Node::And(ch) => {
                // Children are disjoint, so at most one can cover the target.
                match ch.iter().find(|&&k| target.is_subset(store.omega(k))) {
                    Some(&k) => {
                        debug_assert_ne!(labels[k], Label::Excluded);
                        stack.push(k);
                    }
                    None => found.push(n),
                }
            }
            Node::Or(e) => {
                for &(_, k) in e.iter().rev() {
                    if labels[k] != Label::Excluded {
                        stack.push(k);
                    }
                }
            }
        }
    }
    found
}

/// Weighted pure parts of a node: `(weight, node, included)`.
type PureEdges = Vec<(f64, NodeRef, bool)>;

struct Isolator<'l> {
    labels: &'l LabelMap,
    memo: NodeMap<PureEdges>,
}

impl Isolator<'_> {
    fn new(labels: &LabelMap) -> Isolator<'_> {
        Isolator {
            labels,
            memo: node_map(),
        }
    }

    /// Splits `n` into an equivalent weighted union of parts that are each
    /// purely included or purely excluded. Every node is assumed to have mass 1.
    fn pure_edges(&mut self, store: &mut Store, n: NodeRef) -> Result<PureEdges> {
        match self.labels[n] {
            Label::Included => return Ok(alloc::vec![(1.0, n, true)]),
            Label::Excluded => return Ok(alloc::vec![(1.0, n, false)]),
            Label::Mixed => {}
        }
        if let Some(e) = self.memo.get(&n) {
            return Ok(e.clone());
        }
        let out = match store.node(n).clone() {
            Node::Lit { .. } => unreachable!("literals are never mixed"),
            Node::Or(edges) => {
                let mut out = Vec::new();
                for (w, k) in edges {
                    for (w2, k2, inc) in self.pure_edges(store, k)? {
                        out.push((w * w2, k2, inc));
                    }
                }
                out
            }
            Node::And(children) => self.split_and(store, &children)?,
        };
        self.memo.insert(n, out.clone());
        Ok(out)
    }

    /// For a mixed AND with included children `F` and mixed children
    /// `M_1..M_k`, each split into an included part `I_i` (mass `m_i`) and an
    /// excluded part `E_i` (mass `1 - m_i`):
    ///
    /// ```text
    ///   included:    F x I_1 x .. x I_k                          weight Π m_i
    ///   excluded i:  F x I_1 x .. x I_{i-1} x E_i x M_{i+1} .. M_k
    ///                                           weight m_1 .. m_{i-1} (1 - m_i)
    /// ```
    ///
    /// The excluded terms are disjoint and the weights telescope to 1.
    fn split_and(&mut self, store: &mut Store, children: &[NodeRef]) -> Result<PureEdges> {
        let mut fixed = Vec::new();
        let mut mixed = Vec::new();
        for &k in children {
            match self.labels[k] {
                Label::Included => fixed.push(k),
                Label::Mixed => mixed.push(k),
                Label::Excluded => panic!("mixed AND node has an excluded child"),
            }
        }
        // (included part, its mass, excluded part, its mass)
        let mut parts = Vec::with_capacity(mixed.len());
        for &m in &mixed {
            let edges = self.pure_edges(store, m)?;
            let inc_mass: f64 = edges.iter().filter(|e| e.2).map(|e| e.0).sum();
            let exc_mass: f64 = edges.iter().filter(|e| !e.2).map(|e| e.0).sum();
            let inc = store.make_or(
                edges
                    .iter()
                    .filter(|e| e.2)
                    .map(|&(w, k, _)| (w / inc_mass, k)),
            )?;
            let exc = store.make_or(
                edges
                    .iter()
                    .filter(|e| !e.2)
                    .map(|&(w, k, _)| (w / exc_mass, k)),
            )?;
            parts.push((inc, inc_mass, exc, exc_mass));
        }

        let mut out = Vec::with_capacity(mixed.len() + 1);
        let mut prefix = 1.0;
        for i in 0..mixed.len() {
            let (_, _, exc, exc_mass) = parts[i];
            let kids = fixed
                .iter()
                .copied()
                .chain(parts[..i].iter().map(|p| p.0))
                .chain(core::iter::once(exc))
                .chain(mixed[i + 1..].iter().copied());
            let term = store.make_and(kids)?;
            out.push((prefix * exc_mass, term, false));
            prefix *= parts[i].1;
        }
        let included = store.make_and(fixed.iter().copied().chain(parts.iter().map(|p| p.0)))?;
        out.push((prefix, included, true));
        Ok(out)
    }
}

/// Rewrites a mixed node into an equivalent OR whose children are each purely
/// included or purely excluded.
pub fn isolate(store: &mut Store, n: NodeRef, labels: &LabelMap) -> Result<NodeRef> {
    if labels.get(n) != Some(Label::Mixed) {
        return Err(Error::NotMixed(n));
    }
    let edges = Isolator::new(labels).pure_edges(store, n)?;
    store.make_or(edges.into_iter().map(|(w, k, _)| (w, k)))
}

/// Marginalizes `avars` out of `n`: every maximal subgraph whose variables
/// lie inside `avars` is removed. Returns the empty AND if nothing remains.
/// Every node is assumed to have mass 1.
pub fn erase_action_vars(store: &mut Store, n: NodeRef, avars: &VarSet) -> Result<NodeRef> {
    let mut memo = node_map();
    erase_rec(store, n, avars, &mut memo)
}

fn erase_rec(
    store: &mut Store,
    n: NodeRef,
    avars: &VarSet,
    memo: &mut NodeMap<NodeRef>,
) -> Result<NodeRef> {
    let omega = store.omega(n);
    if omega.is_subset(avars) {
        return Ok(store.empty());
    }
    if !omega.intersects(avars) {
        return Ok(n);
    }
    if let Some(&m) = memo.get(&n) {
        return Ok(m);
    }
    let out = match store.node(n).clone() {
        Node::Lit { .. } => unreachable!("literal is either inside or outside"),
        Node::And(ch) => {
            let mut kids = Vec::with_capacity(ch.len());
            for k in ch {
                kids.push(erase_rec(store, k, avars, memo)?);
            }
            store.make_and(kids)?
        }
        Node::Or(e) => {
            let mut edges = Vec::with_capacity(e.len());
            for (w, k) in e {
                edges.push((w, erase_rec(store, k, avars, memo)?));
            }
            store.make_or(edges)?
        }
    };
    memo.insert(n, out);
    Ok(out)
}

/// Union of the action's outcomes, each a product of literals.
pub fn action_subgraph(store: &mut Store, a: &Action) -> Result<NodeRef> {
    let mut edges = Vec::with_capacity(a.outcomes().len());
    for (p, values) in a.outcomes() {
        let lits: Vec<_> = a
            .vars()
            .iter()
            .zip(values)
            .map(|(&v, &u)| store.make_lit(v, u))
            .collect();
        edges.push((*p, store.make_and(lits)?));
    }
    store.make_or(edges)
}

/// Result of [`apply_action`].
#[derive(Debug, Clone, PartialEq)]
pub struct Acted {
    pub state: Aobs,
    /// Probability of the condition before acting. Zero means the input was
    /// returned unchanged up to normalization.
    pub selected_mass: f64,
}

/// Applies `a` to the substate of `s` where `c` holds. States outside the
/// selection keep their probability; each selected state is replaced by one
/// state per outcome with its action variables overwritten.
pub fn apply_action(store: &mut Store, s: &Aobs, c: &Condition, a: &Action) -> Result<Acted> {
    a.check_within(&s.universe)?;
    c.check_within(&s.universe)?;
    let selected_mass = node_probability(store, s.root, c);
    let avars = a.var_set();
    let input = normalize(store, s)?;
    if selected_mass <= 0.0 || avars.is_empty() {
        return Ok(Acted {
            state: input,
            selected_mass,
        });
    }
    let labels = label_nodes(store, input.root, c)?;
    if labels[input.root] == Label::Excluded {
        return Ok(Acted {
            state: input,
            selected_mass: 0.0,
        });
    }
    let minimal = find_minimal_subgraphs(store, input.root, c, &avars, &labels);
    debug_assert!(!minimal.is_empty());

    let outcome = action_subgraph(store, a)?;
    let mut rw = Rewriter {
        target: avars.union(&c.vars()),
        avars,
        outcome,
        labels: &labels,
        minimal: minimal.iter().map(|&m| (m, ())).collect(),
        isolator: Isolator::new(&labels),
        memo: node_map(),
        erased: node_map(),
    };
    let root = rw.rewrite(store, input.root)?;
    let state = normalize(store, &Aobs::new(store, root))?;
    Ok(Acted {
        state,
        selected_mass,
    })
}

struct Rewriter<'l> {
    target: VarSet,
    avars: VarSet,
    outcome: NodeRef,
    labels: &'l LabelMap,
    minimal: NodeMap<()>,
    isolator: Isolator<'l>,
    memo: NodeMap<NodeRef>,
    erased: NodeMap<NodeRef>,
}

impl Rewriter<'_> {
    fn rewrite(&mut self, store: &mut Store, n: NodeRef) -> Result<NodeRef> {
        if let Some(&m) = self.memo.get(&n) {
            return Ok(m);
        }
        let out = if self.minimal.contains_key(&n) {
            self.act(store, n)?
        } else {
            match store.node(n).clone() {
                Node::Lit { .. } => n,
                Node::And(ch) => {
                    let mut kids = Vec::with_capacity(ch.len());
                    for k in ch {
                        let on_path = self.labels[k] != Label::Excluded
                            && self.target.is_subset(store.omega(k));
                        kids.push(if on_path { self.rewrite(store, k)? } else { k });
                    }
                    store.make_and(kids)?
                }
                Node::Or(e) => {
                    let mut edges = Vec::with_capacity(e.len());
                    for (w, k) in e {
                        let k = if self.labels[k] != Label::Excluded {
                            self.rewrite(store, k)?
                        } else {
                            k
                        };
                        edges.push((w, k));
                    }
                    store.make_or(edges)?
                }
            }
        };
        self.memo.insert(n, out);
        Ok(out)
    }

    fn act(&mut self, store: &mut Store, n: NodeRef) -> Result<NodeRef> {
        match self.labels[n] {
            Label::Excluded => Ok(n),
            Label::Included => self.graft(store, n),
            Label::Mixed => {
                let parts = self.isolator.pure_edges(store, n)?;
                let mut edges = Vec::with_capacity(parts.len());
                for (w, k, inc) in parts {
                    edges.push((w, if inc { self.graft(store, k)? } else { k }));
                }
                store.make_or(edges)
            }
        }
    }

    fn graft(&mut self, store: &mut Store, n: NodeRef) -> Result<NodeRef> {
        let rest = erase_rec(store, n, &self.avars, &mut self.erased)?;
        store.make_and([rest, self.outcome])
    }
}

/// Normal form: no AND child of an AND, no OR child of an OR, every OR's
/// weights sum to 1. Mass that does not fit is pushed up to the nearest
/// ancestor OR edge; what reaches the root must be 1.
pub fn normalize(store: &mut Store, s: &Aobs) -> Result<Aobs> {
    let mut memo = node_map();
    let (scale, root) = normalize_rec(store, s.root, &mut memo)?;
    if (scale - 1.0).abs() > PROB_EPS {
        return Err(Error::MassLeak(scale));
    }
    Ok(Aobs::new(store, root))
}

fn normalize_rec(
    store: &mut Store,
    n: NodeRef,
    memo: &mut NodeMap<(f64, NodeRef)>,
) -> Result<(f64, NodeRef)> {
    if let Some(&m) = memo.get(&n) {
        return Ok(m);
    }
    let out = match store.node(n).clone() {
        Node::Lit { .. } => (1.0, n),
        Node::And(ch) => {
            let mut scale = 1.0;
            let mut kids = Vec::with_capacity(ch.len());
            for k in ch {
                let (s, k) = normalize_rec(store, k, memo)?;
                scale *= s;
                match store.node(k) {
                    Node::And(inner) => kids.extend_from_slice(inner),
                    _ => kids.push(k),
                }
            }
            (scale, store.make_and(kids)?)
        }
        Node::Or(e) => {
            let mut edges = Vec::with_capacity(e.len());
            for (w, k) in e {
                let (s, k) = normalize_rec(store, k, memo)?;
                match store.node(k) {
                    Node::Or(inner) => edges.extend(inner.iter().map(|&(w2, k2)| (w * s * w2, k2))),
                    _ => edges.push((w * s, k)),
                }
            }
            let total: f64 = edges.iter().map(|e| e.0).sum();
            if total != 1.0 {
                for e in &mut edges {
                    e.0 /= total;
                }
            }
            (total, store.make_or(edges)?)
        }
    };
    memo.insert(n, out);
    Ok(out)
}
