//! Greedy factoring of children shared between AND nodes.
//!
//! Moving a common subset of children of two AND nodes into a new AND child
//! of both does not change the states either node describes but can shrink
//! the graph. The search is greedy: the AND node with the most children is
//! paired with the AND node it shares the most children with; the shared part
//! is split off when it is big enough; both nodes go back into the queue.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::Result;
use crate::store::{node_map, Aobs, Node, NodeMap, NodeRef, Store};

pub const DEFAULT_NODE_COST: f64 = 1.0;
pub const DEFAULT_THRESHOLD: usize = 2;

/// Logical node id during optimization. Original nodes come first, factors
/// are appended.
type Lid = u32;

#[derive(Default)]
enum Logical {
    #[default]
    Empty,
    Fixed(NodeRef),
    Or(Vec<(f64, Lid)>),
    And(Vec<Lid>),
}

impl Logical {
    fn and_children(&self) -> Vec<Lid> {
        match self {
            Logical::And(c) => c.clone(),
            _ => Vec::new(),
        }
    }
}

struct Factoring {
    nodes: Vec<Logical>,
    /// child -> AND parents
    parents: BTreeMap<Lid, BTreeSet<Lid>>,
    version: Vec<u32>,
    queue: BinaryHeap<(usize, Reverse<Lid>, u32)>,
}

impl Factoring {
    fn build(store: &Store, root: NodeRef) -> (Self, Lid) {
        let order = store.reachable(root);
        let ids: NodeMap<Lid> = order
            .iter()
            .enumerate()
            .map(|(i, &r)| (r, i as Lid))
            .collect();
        let mut f = Factoring {
            nodes: Vec::with_capacity(order.len()),
            parents: BTreeMap::new(),
            version: alloc::vec![0; order.len()],
            queue: BinaryHeap::new(),
        };
        for &r in &order {
            let logical = match store.node(r) {
                Node::Lit { .. } => Logical::Fixed(r),
                Node::Or(e) => Logical::Or(e.iter().map(|(w, k)| (*w, ids[k])).collect()),
                Node::And(c) => Logical::And(c.iter().map(|k| ids[k]).collect()),
            };
            f.nodes.push(logical);
        }
        for id in 0..f.nodes.len() as Lid {
            if let Logical::And(c) = &f.nodes[id as usize] {
                for &k in c {
                    f.parents.entry(k).or_default().insert(id);
                }
                f.push(id);
            }
        }
        (f, ids[&root])
    }

    fn children(&self, id: Lid) -> &[Lid] {
        match &self.nodes[id as usize] {
            Logical::And(c) => c,
            _ => &[],
        }
    }

    fn push(&mut self, id: Lid) {
        let len = self.children(id).len();
        self.queue
            .push((len, Reverse(id), self.version[id as usize]));
    }

    fn set_children(&mut self, id: Lid, kids: Vec<Lid>) {
        let old = core::mem::take(&mut self.nodes[id as usize]);
        for k in old.and_children() {
            if let Some(p) = self.parents.get_mut(&k) {
                p.remove(&id);
            }
        }
        for &k in &kids {
            self.parents.entry(k).or_default().insert(id);
        }
        self.nodes[id as usize] = Logical::And(kids);
        self.version[id as usize] += 1;
        self.push(id);
    }

    /// AND node sharing the most children with `p`, ties to the lowest id.
    fn best_partner(&self, p: Lid) -> Option<(Lid, Vec<Lid>)> {
        let mut counts: BTreeMap<Lid, usize> = BTreeMap::new();
        for c in self.children(p) {
            for &q in self.parents.get(c).into_iter().flatten() {
                if q != p {
                    *counts.entry(q).or_default() += 1;
                }
            }
        }
        let (&q, _) = counts
            .iter()
            .max_by_key(|&(&q, &n)| (n, Reverse(q)))?;
        let qs: BTreeSet<Lid> = self.children(q).iter().copied().collect();
        let common = self
            .children(p)
            .iter()
            .copied()
            .filter(|c| qs.contains(c))
            .collect();
        Some((q, common))
    }

    fn run(&mut self, node_cost: f64, threshold: usize) {
        while let Some((_, Reverse(p), ver)) = self.queue.pop() {
            if ver != self.version[p as usize] {
                continue;
            }
            let Some((q, common)) = self.best_partner(p) else {
                continue;
            };
            let k = common.len();
            if k <= threshold {
                continue;
            }
            let (np, nq) = (self.children(p).len(), self.children(q).len());
            if k == np && k == nq {
                // identical child sets; hash-consing merges them on rebuild
                continue;
            }
            let shared: BTreeSet<Lid> = common.iter().copied().collect();
            let without = |f: &Self, id: Lid, with: Lid| -> Vec<Lid> {
                let mut v: Vec<Lid> = f
                    .children(id)
                    .iter()
                    .copied()
                    .filter(|c| !shared.contains(c))
                    .collect();
                v.push(with);
                v
            };
            if k == nq {
                let kids = without(self, p, q);
                self.set_children(p, kids);
            } else if k == np {
                let kids = without(self, q, p);
                self.set_children(q, kids);
            } else {
                // new node with k children replaces k children in two parents
                if (k as f64) < 2.0 + node_cost {
                    continue;
                }
                let x = self.nodes.len() as Lid;
                self.nodes.push(Logical::And(Vec::new()));
                self.version.push(0);
                let (kp, kq) = (without(self, p, x), without(self, q, x));
                self.set_children(x, common);
                self.set_children(p, kp);
                self.set_children(q, kq);
            }
        }
    }

    fn rebuild(&self, store: &mut Store, id: Lid, memo: &mut BTreeMap<Lid, NodeRef>) -> Result<NodeRef> {
        if let Some(&r) = memo.get(&id) {
            return Ok(r);
        }
        let r = match &self.nodes[id as usize] {
            Logical::Fixed(r) => *r,
            Logical::Empty => unreachable!("placeholder node survived"),
            Logical::Or(e) => {
                let mut edges = Vec::with_capacity(e.len());
                for &(w, k) in e {
                    edges.push((w, self.rebuild(store, k, memo)?));
                }
                store.make_or(edges)?
            }
            Logical::And(c) => {
                let mut kids = Vec::with_capacity(c.len());
                for &k in c {
                    kids.push(self.rebuild(store, k, memo)?);
                }
                store.make_and(kids)?
            }
        };
        memo.insert(id, r);
        Ok(r)
    }
}

/// Greedily splits shared child subsets of AND nodes into new AND nodes.
///
/// A split is taken when the shared part has more than `threshold` children
/// and, for a new node, when it does not raise `Σ (|children| + node_cost)`.
/// The described belief state is unchanged.
pub fn greedy_optimize(store: &mut Store, s: &Aobs, node_cost: f64, threshold: usize) -> Result<Aobs> {
    let (mut f, root) = Factoring::build(store, s.root);
    f.run(node_cost, threshold.max(1));
    let mut memo = BTreeMap::new();
    let root = f.rebuild(store, root, &mut memo)?;
    Ok(Aobs::new(store, root))
}

/// Two OR nodes whose shared children carry proportional weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OrFactor {
    pub first: NodeRef,
    pub second: NodeRef,
    /// Shared children, sorted.
    pub common: Vec<NodeRef>,
    /// Weight of the common part in `first` relative to `second`.
    pub ratio: f64,
}

/// OR node pairs that could share a sub-OR: at least two common children
/// whose weights in the two nodes are proportional within relative `eps`.
/// For each pair the largest proportional group is reported.
pub fn or_factor_candidates(store: &Store, s: &Aobs, eps: f64) -> Vec<OrFactor> {
    let ors: Vec<NodeRef> = store
        .reachable(s.root)
        .into_iter()
        .filter(|&r| store.node(r).is_or())
        .collect();
    let mut parents: NodeMap<Vec<NodeRef>> = node_map();
    for &o in &ors {
        for c in store.node(o).children() {
            parents.entry(c).or_default().push(o);
        }
    }
    let mut pairs = BTreeSet::new();
    for list in parents.values() {
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                pairs.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
    }

    let weights = |r: NodeRef| -> BTreeMap<NodeRef, f64> {
        match store.node(r) {
            Node::Or(e) => e.iter().map(|&(w, k)| (k, w)).collect(),
            _ => BTreeMap::new(),
        }
    };
    let mut out = Vec::new();
    for (a, b) in pairs {
        let (wa, wb) = (weights(a), weights(b));
        let mut ratios: Vec<(f64, NodeRef)> = wa
            .iter()
            .filter_map(|(k, x)| wb.get(k).map(|y| (x / y, *k)))
            .collect();
        if ratios.len() < 2 {
            continue;
        }
        ratios.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        // group runs of equal ratios, keep the largest
        let mut best: Option<(f64, Vec<NodeRef>)> = None;
        let mut i = 0;
        while i < ratios.len() {
            let r0 = ratios[i].0;
            let mut j = i;
            while j < ratios.len() && (ratios[j].0 - r0).abs() <= eps * r0.abs().max(ratios[j].0.abs()) {
                j += 1;
            }
            if j - i >= 2 && best.as_ref().is_none_or(|b| j - i > b.1.len()) {
                let mut common: Vec<_> = ratios[i..j].iter().map(|x| x.1).collect();
                common.sort_unstable();
                best = Some((r0, common));
            }
            i = j;
        }
        if let Some((ratio, common)) = best {
            out.push(OrFactor {
                first: a,
                second: b,
                common,
                ratio,
            });
        }
    }
    out
}
