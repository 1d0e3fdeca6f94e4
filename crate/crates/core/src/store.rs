//! Hash-consed And-Or DAG storage.
//!
//! Every node is interned under a structural hash ([`NodeRef`]). Two
//! structurally identical subgraphs always intern to the same reference, in
//! this store and in any other store they are imported into. The store is
//! append-only: rewrites build new nodes and leave old ones untouched, so any
//! earlier root stays valid.
//!
//! ```text
//!   LIT   v = u                    S = {1, v=u}
//!   AND   {c_1, .., c_k}           S = S(c_1) x .. x S(c_k)   (disjoint variables)
//!   OR    [(w_1, c_1), ..]         S = w_1 S(c_1) u ..        (equal variables)
//! ```

use alloc::vec::Vec;
use core::fmt;
use core::hash::{BuildHasherDefault, Hasher};

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::oracle::TabularPbs;
use crate::var::{PhysicalState, Value, VarId, VarSet};
use crate::PROB_EPS;

/// Structural hash identifying an interned node.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(pub u64);

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:012x}", self.0 >> 16)
    }
}

impl fmt::LowerHex for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Hasher for maps keyed by [`NodeRef`], whose payload is already a hash.
#[derive(Default)]
pub struct RefHasher(u64);

impl Hasher for RefHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 << 8) ^ u64::from(b) ^ (self.0 >> 56);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = n;
    }
}

pub type NodeMap<V> = HashMap<NodeRef, V, BuildHasherDefault<RefHasher>>;

pub(crate) fn node_map<V>() -> NodeMap<V> {
    NodeMap::default()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Lit { var: VarId, value: Value },
    /// Children sorted by reference, pairwise disjoint in their variables.
    And(Vec<NodeRef>),
    /// Edges sorted by child reference, one edge per distinct child.
    Or(Vec<(f64, NodeRef)>),
}

impl Node {
    pub fn is_lit(&self) -> bool {
        matches!(self, Node::Lit { .. })
    }

    pub fn is_and(&self) -> bool {
        matches!(self, Node::And(_))
    }

    pub fn is_or(&self) -> bool {
        matches!(self, Node::Or(_))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeRef> + '_ {
        let (ands, ors): (&[NodeRef], &[(f64, NodeRef)]) = match self {
            Node::Lit { .. } => (&[], &[]),
            Node::And(c) => (c, &[]),
            Node::Or(e) => (&[], e),
        };
        ands.iter().copied().chain(ors.iter().map(|&(_, c)| c))
    }

    fn structural_hash(&self) -> u64 {
        match self {
            Node::Lit { var, value } => mix(mix(TAG_LIT, u64::from(var.0)), *value as u64),
            Node::And(c) => c.iter().fold(TAG_AND, |h, r| mix(h, r.0)),
            Node::Or(e) => e
                .iter()
                .fold(TAG_OR, |h, &(w, r)| mix(mix(h, quantize(w) as u64), r.0)),
        }
    }

    fn same_structure(&self, other: &Node) -> bool {
        match (self, other) {
            (Node::Or(a), Node::Or(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| x.1 == y.1 && quantize(x.0) == quantize(y.0))
            }
            _ => self == other,
        }
    }
}

const TAG_LIT: u64 = 0x6c69_7400_0000_0001;
const TAG_AND: u64 = 0x616e_6400_0000_0002;
const TAG_OR: u64 = 0x6f72_0000_0000_0003;

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(h: u64, x: u64) -> u64 {
    splitmix(h.rotate_left(23) ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15))
}

/// Edge weights are identified up to 12 decimal digits.
pub fn quantize(w: f64) -> i64 {
    let x = w * 1e12;
    // round half away from zero; `f64::round` needs std
    if x >= 0.0 {
        (x + 0.5) as i64
    } else {
        (x - 0.5) as i64
    }
}

struct Entry {
    node: Node,
    omega: VarSet,
}

/// Append-only interning table for And-Or DAG nodes.
pub struct Store {
    entries: Vec<Entry>,
    index: NodeMap<u32>,
    empty: NodeRef,
    expansion_cap: usize,
}

impl Default for Store {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Store")
            .field("nodes", &self.entries.len())
            .finish()
    }
}

/// Default limit on the number of states materialized by enumeration.
pub const DEFAULT_EXPANSION_CAP: usize = 1_000_000;

impl Store {
    pub fn new() -> Self {
        let mut store = Store {
            entries: Vec::new(),
            index: node_map(),
            empty: NodeRef(0),
            expansion_cap: DEFAULT_EXPANSION_CAP,
        };
        store.empty = store.intern(Node::And(Vec::new()), VarSet::new());
        store
    }

    pub fn with_expansion_cap(mut self, cap: usize) -> Self {
        self.expansion_cap = cap;
        self
    }

    pub fn expansion_cap(&self) -> usize {
        self.expansion_cap
    }

    pub fn set_expansion_cap(&mut self, cap: usize) {
        self.expansion_cap = cap;
    }

    /// Number of interned nodes, reachable or not.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, r: NodeRef) -> bool {
        self.index.contains_key(&r)
    }

    /// The empty AND: the substate `{1, ∅}`, identity of the product.
    pub fn empty(&self) -> NodeRef {
        self.empty
    }

    fn intern(&mut self, node: Node, omega: VarSet) -> NodeRef {
        let mut h = node.structural_hash();
        loop {
            match self.index.get(&NodeRef(h)) {
                None => break,
                Some(&i) if self.entries[i as usize].node.same_structure(&node) => {
                    return NodeRef(h)
                }
                // 64-bit collision between different structures: probe.
                Some(_) => h = h.wrapping_add(1),
            }
        }
        let r = NodeRef(h);
        self.index.insert(r, self.entries.len() as u32);
        self.entries.push(Entry { node, omega });
        r
    }

    fn entry(&self, r: NodeRef) -> &Entry {
        match self.index.get(&r) {
            Some(&i) => &self.entries[i as usize],
            None => panic!("node {r:?} does not belong to this store"),
        }
    }

    pub fn get(&self, r: NodeRef) -> Option<&Node> {
        self.index.get(&r).map(|&i| &self.entries[i as usize].node)
    }

    /// # Panics
    /// If `r` was not interned in this store.
    pub fn node(&self, r: NodeRef) -> &Node {
        &self.entry(r).node
    }

    /// Variable subspace Ω of a node, computed once at interning.
    pub fn omega(&self, r: NodeRef) -> &VarSet {
        &self.entry(r).omega
    }

    pub fn make_lit(&mut self, var: VarId, value: Value) -> NodeRef {
        self.intern(Node::Lit { var, value }, VarSet::singleton(var))
    }

    /// Cartesian product of substates over pairwise disjoint variables.
    ///
    /// Repeated references and empty-AND children are dropped; a single
    /// remaining child is returned as is.
    pub fn make_and<I: IntoIterator<Item = NodeRef>>(&mut self, children: I) -> Result<NodeRef> {
        let mut kids: Vec<NodeRef> = children.into_iter().filter(|&c| c != self.empty).collect();
        kids.sort_unstable();
        kids.dedup();
        let mut omega = VarSet::new();
        for &c in &kids {
            let o = &self.entry(c).omega;
            if omega.intersects(o) {
                let v = o.iter().find(|v| omega.contains(*v)).expect("intersecting sets");
                return Err(Error::OverlappingSubspaces(v));
            }
            omega.union_with(o);
        }
        Ok(match kids.len() {
            0 => self.empty,
            1 => kids[0],
            _ => self.intern(Node::And(kids), omega),
        })
    }

    /// Weighted union of substates over the same variables.
    ///
    /// Edges to the same child are merged by summing weights. A single edge of
    /// weight 1 collapses to the child.
    pub fn make_or<I: IntoIterator<Item = (f64, NodeRef)>>(&mut self, edges: I) -> Result<NodeRef> {
        let mut edges: Vec<(f64, NodeRef)> = edges.into_iter().collect();
        if let Some(&(w, _)) = edges.iter().find(|(w, _)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeight(w));
        }
        if edges.is_empty() {
            return Err(Error::EmptyOr);
        }
        edges.sort_unstable_by_key(|e| e.1);
        let mut merged: Vec<(f64, NodeRef)> = Vec::with_capacity(edges.len());
        for (w, c) in edges {
            match merged.last_mut() {
                Some(last) if last.1 == c => last.0 += w,
                _ => merged.push((w, c)),
            }
        }
        let omega = self.entry(merged[0].1).omega.clone();
        if merged[1..].iter().any(|e| self.entry(e.1).omega != omega) {
            return Err(Error::MismatchedSubspaces);
        }
        if merged.len() == 1 && quantize(merged[0].0) == quantize(1.0) {
            return Ok(merged[0].1);
        }
        Ok(self.intern(Node::Or(merged), omega))
    }

    /// Copies the subgraph of `root` from another store into this one.
    pub fn import(&mut self, other: &Store, root: NodeRef) -> NodeRef {
        let mut memo = node_map();
        self.import_rec(other, root, &mut memo)
    }

    fn import_rec(&mut self, other: &Store, r: NodeRef, memo: &mut NodeMap<NodeRef>) -> NodeRef {
        if let Some(&m) = memo.get(&r) {
            return m;
        }
        let out = match other.node(r).clone() {
            Node::Lit { var, value } => self.make_lit(var, value),
            Node::And(c) => {
                let kids: Vec<_> = c.iter().map(|&k| self.import_rec(other, k, memo)).collect();
                let omega = kids.iter().fold(VarSet::new(), |acc, &k| acc.union(self.omega(k)));
                if kids.is_empty() {
                    self.empty
                } else {
                    self.intern(Node::And(sorted(kids)), omega)
                }
            }
            Node::Or(e) => {
                let edges: Vec<_> = e
                    .iter()
                    .map(|&(w, k)| (w, self.import_rec(other, k, memo)))
                    .collect();
                let omega = self.omega(edges[0].1).clone();
                let mut edges = edges;
                edges.sort_unstable_by_key(|e| e.1);
                self.intern(Node::Or(edges), omega)
            }
        };
        memo.insert(r, out);
        out
    }

    /// Every node reachable from `root`, children before parents.
    pub fn reachable(&self, root: NodeRef) -> Vec<NodeRef> {
        let mut seen = node_map::<()>();
        let mut order = Vec::new();
        // (node, children pushed?)
        let mut stack = alloc::vec![(root, false)];
        while let Some((r, expanded)) = stack.pop() {
            if expanded {
                order.push(r);
                continue;
            }
            if seen.insert(r, ()).is_some() {
                continue;
            }
            stack.push((r, true));
            for c in self.node(r).children() {
                if !seen.contains_key(&c) {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Probability mass of the substate of `r`. Equal to 1 for every node of
    /// a normalized graph.
    pub fn mass(&self, r: NodeRef) -> f64 {
        let mut memo: NodeMap<f64> = node_map();
        for n in self.reachable(r) {
            let m = match self.node(n) {
                Node::Lit { .. } => 1.0,
                Node::And(c) => c.iter().map(|k| memo[k]).product(),
                Node::Or(e) => e.iter().map(|(w, k)| w * memo[k]).sum(),
            };
            memo.insert(n, m);
        }
        memo[&r]
    }

    /// Number of weighted states the full expansion of `r` would produce,
    /// counting repeated states separately. Saturates at `u128::MAX`.
    pub fn count_states(&self, r: NodeRef) -> u128 {
        let mut memo: NodeMap<u128> = node_map();
        for n in self.reachable(r) {
            let c = match self.node(n) {
                Node::Lit { .. } => 1,
                Node::And(c) => c.iter().fold(1u128, |acc, k| acc.saturating_mul(memo[k])),
                Node::Or(e) => e.iter().fold(0u128, |acc, (_, k)| acc.saturating_add(memo[k])),
            };
            memo.insert(n, c);
        }
        memo[&r]
    }

    /// Full expansion into weighted partial states over Ω(r). Repeated states
    /// are kept.
    pub fn enumerate_states(&self, r: NodeRef) -> Result<TabularPbs> {
        let count = self.count_states(r);
        if count > self.expansion_cap as u128 {
            return Err(Error::ExpansionTooLarge {
                cap: self.expansion_cap,
            });
        }
        Ok(TabularPbs::from_rows(self.expand(r)))
    }

    fn expand(&self, r: NodeRef) -> Vec<(f64, PhysicalState)> {
        match self.node(r) {
            Node::Lit { var, value } => {
                alloc::vec![(1.0, PhysicalState::from_pairs([(*var, *value)]))]
            }
            Node::And(c) => {
                let mut acc = alloc::vec![(1.0, PhysicalState::new())];
                for &k in c {
                    let part = self.expand(k);
                    acc = acc
                        .iter()
                        .flat_map(|(p, s)| part.iter().map(move |(q, t)| (p * q, s.product(t))))
                        .collect();
                }
                acc
            }
            Node::Or(e) => e
                .iter()
                .flat_map(|&(w, k)| {
                    self.expand(k)
                        .into_iter()
                        .map(move |(p, s)| (w * p, s))
                })
                .collect(),
        }
    }

    /// Node and edge counts of the graph reachable from `root`.
    pub fn size_stats(&self, root: NodeRef) -> SizeStats {
        let mut st = SizeStats::default();
        for n in self.reachable(root) {
            match self.node(n) {
                Node::Lit { .. } => st.lits += 1,
                Node::And(c) => {
                    st.ands += 1;
                    st.edges += c.len() as u64;
                }
                Node::Or(e) => {
                    st.ors += 1;
                    st.edges += e.len() as u64;
                }
            }
        }
        st
    }

    /// `|E| + N_and + N_or + 2 N_lit` over the unique reachable nodes.
    pub fn size_metric(&self, root: NodeRef) -> u64 {
        self.size_stats(root).metric()
    }

    /// Belief state holding one physical state with certainty.
    pub fn from_physical_state(&mut self, s: &PhysicalState, universe: &VarSet) -> Result<Aobs> {
        if let Some(&(v, _)) = s.pairs().iter().find(|(v, _)| !universe.contains(*v)) {
            return Err(Error::UnknownVariable(v));
        }
        if let Some(v) = universe.iter().find(|&v| s.get(v).is_none()) {
            return Err(Error::PartialAssignment(v));
        }
        let lits: Vec<_> = s.pairs().iter().map(|&(v, u)| self.make_lit(v, u)).collect();
        let root = self.make_and(lits)?;
        Ok(Aobs::new(self, root))
    }

    /// Weighted union `w·a ∪ (1-w)·b` under a fresh OR root. States present in
    /// both inputs appear twice; inference is unaffected.
    pub fn union_roots(&mut self, a: &Aobs, b: &Aobs, w: f64) -> Result<Aobs> {
        if a.universe != b.universe {
            return Err(Error::MismatchedUniverse);
        }
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::InvalidUnionWeight(w));
        }
        let root = self.make_or([(w, a.root), (1.0 - w, b.root)])?;
        Ok(Aobs::new(self, root))
    }

    /// First normal-form violation under `root`, if any: an AND child of an
    /// AND, an OR child of an OR, or an OR whose weights do not sum to 1.
    pub fn normal_form_violation(&self, root: NodeRef) -> Option<NodeRef> {
        self.reachable(root).into_iter().find(|&n| match self.node(n) {
            Node::Lit { .. } => false,
            Node::And(c) => c.iter().any(|&k| self.node(k).is_and()),
            Node::Or(e) => {
                e.iter().any(|&(_, k)| self.node(k).is_or())
                    || (e.iter().map(|(w, _)| w).sum::<f64>() - 1.0).abs() > PROB_EPS
            }
        })
    }
}

fn sorted(mut v: Vec<NodeRef>) -> Vec<NodeRef> {
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeStats {
    pub edges: u64,
    pub ands: u64,
    pub ors: u64,
    pub lits: u64,
}

impl SizeStats {
    pub fn metric(&self) -> u64 {
        self.edges + self.ands + self.ors + 2 * self.lits
    }

    pub fn nodes(&self) -> u64 {
        self.ands + self.ors + self.lits
    }
}

/// A probabilistic belief state: a root in some [`Store`] together with the
/// universe of variables it ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aobs {
    pub root: NodeRef,
    pub universe: VarSet,
}

impl Aobs {
    pub fn new(store: &Store, root: NodeRef) -> Self {
        Aobs {
            root,
            universe: store.omega(root).clone(),
        }
    }
}
