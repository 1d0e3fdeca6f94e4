//! Reduced ordered BDDs with one-hot encoding of multivalued variables.
//!
//! Only used as a size baseline: a BDD describes which states are possible,
//! not how likely they are. The boolean order is fixed (variable-major,
//! value-minor) and there are no complemented edges.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::var::{Action, Condition, PhysicalState, Value, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BddNode {
    var: u32,
    low: BddRef,
    high: BddRef,
}

const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

/// BDD manager: unique table and operation caches.
#[derive(Debug, Clone)]
pub struct Bdd {
    nodes: Vec<BddNode>,
    unique: HashMap<BddNode, BddRef>,
    apply_cache: HashMap<(BoolOp, BddRef, BddRef), BddRef>,
    not_cache: HashMap<BddRef, BddRef>,
}

impl Default for Bdd {
    fn default() -> Self {
        Self::new()
    }
}

impl Bdd {
    pub fn new() -> Self {
        let term = |v| BddNode {
            var: TERMINAL_VAR,
            low: BddRef(v),
            high: BddRef(v),
        };
        Bdd {
            nodes: alloc::vec![term(0), term(1)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
        }
    }

    /// Number of nodes ever created, including unreachable ones.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.not_cache.clear();
    }

    fn var_of(&self, f: BddRef) -> u32 {
        self.nodes[f.0 as usize].var
    }

    pub fn low(&self, f: BddRef) -> BddRef {
        self.nodes[f.0 as usize].low
    }

    pub fn high(&self, f: BddRef) -> BddRef {
        self.nodes[f.0 as usize].high
    }

    /// Decision variable of an internal node.
    pub fn top_var(&self, f: BddRef) -> Option<u32> {
        (!f.is_terminal()).then(|| self.var_of(f))
    }

    fn mk(&mut self, var: u32, low: BddRef, high: BddRef) -> BddRef {
        if low == high {
            return low;
        }
        let key = BddNode { var, low, high };
        if let Some(&r) = self.unique.get(&key) {
            return r;
        }
        let r = BddRef(self.nodes.len() as u32);
        self.nodes.push(key);
        self.unique.insert(key, r);
        r
    }

    pub fn var(&mut self, i: u32) -> BddRef {
        self.mk(i, BddRef::FALSE, BddRef::TRUE)
    }

    pub fn nvar(&mut self, i: u32) -> BddRef {
        self.mk(i, BddRef::TRUE, BddRef::FALSE)
    }

    /// Conjunction of literals `(var, polarity)`, built bottom-up.
    pub fn cube(&mut self, lits: &[(u32, bool)]) -> BddRef {
        let mut lits = lits.to_vec();
        lits.sort_unstable_by_key(|l| core::cmp::Reverse(l.0));
        lits.dedup();
        if lits.windows(2).any(|w| w[0].0 == w[1].0) {
            return BddRef::FALSE;
        }
        lits.into_iter().fold(BddRef::TRUE, |acc, (v, pos)| {
            if pos {
                self.mk(v, BddRef::FALSE, acc)
            } else {
                self.mk(v, acc, BddRef::FALSE)
            }
        })
    }

    pub fn apply(&mut self, op: BoolOp, a: BddRef, b: BddRef) -> BddRef {
        let (f, t) = (BddRef::FALSE, BddRef::TRUE);
        match op {
            BoolOp::And => {
                if a == f || b == f {
                    return f;
                }
                if a == t {
                    return b;
                }
                if b == t || a == b {
                    return a;
                }
            }
            BoolOp::Or => {
                if a == t || b == t {
                    return t;
                }
                if a == f {
                    return b;
                }
                if b == f || a == b {
                    return a;
                }
            }
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.apply_cache.get(&(op, a, b)) {
            return r;
        }
        let (va, vb) = (self.var_of(a), self.var_of(b));
        let v = va.min(vb);
        let (a0, a1) = if va == v { (self.low(a), self.high(a)) } else { (a, a) };
        let (b0, b1) = if vb == v { (self.low(b), self.high(b)) } else { (b, b) };
        let lo = self.apply(op, a0, b0);
        let hi = self.apply(op, a1, b1);
        let r = self.mk(v, lo, hi);
        self.apply_cache.insert((op, a, b), r);
        r
    }

    pub fn and(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BoolOp::And, a, b)
    }

    pub fn or(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BoolOp::Or, a, b)
    }

    pub fn not(&mut self, a: BddRef) -> BddRef {
        if a == BddRef::FALSE {
            return BddRef::TRUE;
        }
        if a == BddRef::TRUE {
            return BddRef::FALSE;
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return r;
        }
        let (v, lo, hi) = (self.var_of(a), self.low(a), self.high(a));
        let (lo, hi) = (self.not(lo), self.not(hi));
        let r = self.mk(v, lo, hi);
        self.not_cache.insert(a, r);
        self.not_cache.insert(r, a);
        r
    }

    /// Existential quantification over the given boolean variables.
    pub fn exists(&mut self, vars: &[u32], a: BddRef) -> BddRef {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut memo = HashMap::new();
        self.exists_rec(&vars, a, &mut memo)
    }

    fn exists_rec(&mut self, vars: &[u32], a: BddRef, memo: &mut HashMap<BddRef, BddRef>) -> BddRef {
        if a.is_terminal() {
            return a;
        }
        let v = self.var_of(a);
        // variables above v can no longer occur below it
        let vars = &vars[vars.partition_point(|&x| x < v)..];
        if vars.is_empty() {
            return a;
        }
        if let Some(&r) = memo.get(&a) {
            return r;
        }
        let lo = self.exists_rec(vars, self.low(a), memo);
        let hi = self.exists_rec(vars, self.high(a), memo);
        let r = if vars[0] == v {
            self.or(lo, hi)
        } else {
            self.mk(v, lo, hi)
        };
        memo.insert(a, r);
        r
    }

    pub fn eval(&self, mut f: BddRef, assignment: impl Fn(u32) -> bool) -> bool {
        while !f.is_terminal() {
            f = if assignment(self.var_of(f)) {
                self.high(f)
            } else {
                self.low(f)
            };
        }
        f == BddRef::TRUE
    }

    /// Reachable internal nodes; terminals are not counted.
    pub fn size(&self, f: BddRef) -> usize {
        let mut seen = hashbrown::HashSet::new();
        let mut stack = alloc::vec![f];
        while let Some(g) = stack.pop() {
            if g.is_terminal() || !seen.insert(g) {
                continue;
            }
            stack.push(self.low(g));
            stack.push(self.high(g));
        }
        seen.len()
    }

    /// `(b ∧ ¬c) ∨ (∃avars. (b ∧ c)) ∧ a`
    pub fn apply_action(&mut self, b: BddRef, c: BddRef, a: BddRef, avars: &[u32]) -> BddRef {
        let nc = self.not(c);
        let keep = self.and(b, nc);
        let selected = self.and(b, c);
        let projected = self.exists(avars, selected);
        let acted = self.and(projected, a);
        self.or(keep, acted)
    }
}

/// One-hot mapping of multivalued variables onto booleans: `v = u` is the
/// boolean `v·|U| + u`, with all other booleans of `v` false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHot {
    pub num_values: u32,
}

impl OneHot {
    pub fn new(num_values: u32) -> Self {
        Self { num_values }
    }

    pub fn bool_var(&self, v: VarId, u: Value) -> Result<u32> {
        if u < 0 || u >= i64::from(self.num_values) {
            return Err(Error::ValueOutOfRange {
                var: v,
                value: u,
                domain: self.num_values,
            });
        }
        Ok(v.0 * self.num_values + u as u32)
    }

    /// All booleans encoding variable `v`.
    pub fn group(&self, v: VarId) -> impl Iterator<Item = u32> {
        let base = v.0 * self.num_values;
        base..base + self.num_values
    }

    fn literal_cube(&self, v: VarId, u: Value, out: &mut Vec<(u32, bool)>) -> Result<()> {
        let hot = self.bool_var(v, u)?;
        out.extend(self.group(v).map(|b| (b, b == hot)));
        Ok(())
    }

    pub fn encode_literal(&self, bdd: &mut Bdd, v: VarId, u: Value) -> Result<BddRef> {
        let mut lits = Vec::new();
        self.literal_cube(v, u, &mut lits)?;
        Ok(bdd.cube(&lits))
    }

    pub fn encode_state(&self, bdd: &mut Bdd, s: &PhysicalState) -> Result<BddRef> {
        let mut lits = Vec::with_capacity(s.len() * self.num_values as usize);
        for &(v, u) in s.pairs() {
            self.literal_cube(v, u, &mut lits)?;
        }
        Ok(bdd.cube(&lits))
    }

    pub fn encode_condition(&self, bdd: &mut Bdd, c: &Condition) -> Result<BddRef> {
        let mut acc = BddRef::TRUE;
        for (v, allowed) in c.constraints() {
            let mut any = BddRef::FALSE;
            for &u in allowed {
                let lit = self.encode_literal(bdd, v, u)?;
                any = bdd.or(any, lit);
            }
            acc = bdd.and(acc, any);
        }
        Ok(acc)
    }

    pub fn encode_action(&self, bdd: &mut Bdd, a: &Action) -> Result<BddRef> {
        let mut acc = BddRef::FALSE;
        for (_, values) in a.outcomes() {
            let mut lits = Vec::new();
            for (&v, &u) in a.vars().iter().zip(values) {
                self.literal_cube(v, u, &mut lits)?;
            }
            let cube = bdd.cube(&lits);
            acc = bdd.or(acc, cube);
        }
        Ok(acc)
    }

    /// Booleans of the action's variables, for the projection step.
    pub fn action_bools(&self, a: &Action) -> Vec<u32> {
        a.vars().iter().flat_map(|&v| self.group(v)).collect()
    }

    /// Set of states as the disjunction of their encodings.
    pub fn encode_support<'a, I>(&self, bdd: &mut Bdd, states: I) -> Result<BddRef>
    where
        I: IntoIterator<Item = &'a PhysicalState>,
    {
        let mut acc = BddRef::FALSE;
        for s in states {
            let e = self.encode_state(bdd, s)?;
            acc = bdd.or(acc, e);
        }
        Ok(acc)
    }
}
