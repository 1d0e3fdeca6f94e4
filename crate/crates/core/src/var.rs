//! Variables, assignments, conditions and actions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::PROB_EPS;

/// Dense index of a state variable inside one universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Value held by a variable. The domain is not bounded up front.
pub type Value = i64;

/// Bitset over [`VarId`]s.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: VarId) -> Self {
        let mut s = Self::new();
        s.insert(v);
        s
    }

    /// `{0, .., n-1}`
    pub fn full(n: usize) -> Self {
        (0..n as u32).map(VarId).collect()
    }

    pub fn insert(&mut self, v: VarId) {
        let (w, b) = (v.index() / 64, v.index() % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn contains(&self, v: VarId) -> bool {
        let (w, b) = (v.index() / 64, v.index() % 64);
        self.words.get(w).is_some_and(|x| x & (1 << b) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &VarSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        self.trim();
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
        out.trim();
        out
    }

    pub fn intersects(&self, other: &VarSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64u32)
                .filter(move |b| w & (1u64 << b) != 0)
                .map(move |b| VarId(i as u32 * 64 + b))
        })
    }

    // Keeps equality/hash canonical.
    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        let mut s = VarSet::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

/// An assignment of values to a set of variables, kept sorted by variable.
///
/// A total assignment over a universe is a physical state; enumeration of a
/// substate produces partial ones over that substate's variables.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysicalState(Vec<(VarId, Value)>);

impl PhysicalState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state from arbitrary pairs. Later duplicates of a variable win.
    pub fn from_pairs<I: IntoIterator<Item = (VarId, Value)>>(pairs: I) -> Self {
        let map: BTreeMap<VarId, Value> = pairs.into_iter().collect();
        Self(map.into_iter().collect())
    }

    /// State over `0..values.len()` with `values[i]` assigned to variable `i`.
    pub fn from_values(values: &[Value]) -> Self {
        Self(
            values
                .iter()
                .enumerate()
                .map(|(i, &u)| (VarId(i as u32), u))
                .collect(),
        )
    }

    pub fn get(&self, v: VarId) -> Option<Value> {
        self.0
            .binary_search_by_key(&v, |&(k, _)| k)
            .ok()
            .map(|i| self.0[i].1)
    }

    pub fn set(&mut self, v: VarId, u: Value) {
        match self.0.binary_search_by_key(&v, |&(k, _)| k) {
            Ok(i) => self.0[i].1 = u,
            Err(i) => self.0.insert(i, (v, u)),
        }
    }

    pub fn vars(&self) -> VarSet {
        self.0.iter().map(|&(v, _)| v).collect()
    }

    pub fn pairs(&self) -> &[(VarId, Value)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation of two assignments over disjoint variables.
    pub fn product(&self, other: &PhysicalState) -> PhysicalState {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i].0 <= other.0[j].0 {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        PhysicalState(out)
    }
}

impl fmt::Debug for PhysicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter().map(|(v, u)| (v.0, u))).finish()
    }
}

/// Conjunction of per-variable predicates: each constrained variable must take
/// one of its allowed values. Unconstrained variables are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Condition {
    constraints: BTreeMap<VarId, BTreeSet<Value>>,
}

impl Condition {
    /// The always-true condition.
    pub fn always() -> Self {
        Self::default()
    }

    pub fn new<I, S>(constraints: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VarId, S)>,
        S: IntoIterator<Item = Value>,
    {
        let mut c = Self::default();
        for (v, allowed) in constraints {
            c = c.with(v, allowed)?;
        }
        Ok(c)
    }

    /// Adds (or replaces) the constraint on `v`.
    pub fn with<S: IntoIterator<Item = Value>>(mut self, v: VarId, allowed: S) -> Result<Self> {
        let set: BTreeSet<Value> = allowed.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyConstraint(v));
        }
        self.constraints.insert(v, set);
        Ok(self)
    }

    pub fn is_always(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn vars(&self) -> VarSet {
        self.constraints.keys().copied().collect()
    }

    pub fn constraints(&self) -> impl Iterator<Item = (VarId, &BTreeSet<Value>)> {
        self.constraints.iter().map(|(&v, s)| (v, s))
    }

    pub fn constraint(&self, v: VarId) -> Option<&BTreeSet<Value>> {
        self.constraints.get(&v)
    }

    /// Truth of the predicate for a single literal.
    #[inline]
    pub fn allows(&self, v: VarId, u: Value) -> bool {
        self.constraints.get(&v).is_none_or(|s| s.contains(&u))
    }

    /// Truth over a (possibly partial) state; variables not present are
    /// treated as unconstrained.
    pub fn holds(&self, s: &PhysicalState) -> bool {
        self.constraints
            .iter()
            .all(|(&v, allowed)| s.get(v).is_none_or(|u| allowed.contains(&u)))
    }

    pub fn check_within(&self, universe: &VarSet) -> Result<()> {
        match self.constraints.keys().find(|v| !universe.contains(**v)) {
            Some(&v) => Err(Error::UnknownVariable(v)),
            None => Ok(()),
        }
    }
}

/// A state-independent probabilistic action: each outcome overwrites exactly
/// the action's variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    vars: Vec<VarId>,
    outcomes: Vec<(f64, Vec<Value>)>,
}

impl Action {
    pub fn new(vars: Vec<VarId>, outcomes: Vec<(f64, Vec<Value>)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidAction("action has no outcomes"));
        }
        let set: VarSet = vars.iter().copied().collect();
        if set.len() != vars.len() {
            return Err(Error::InvalidAction("action variables repeat"));
        }
        if outcomes.iter().any(|(_, vals)| vals.len() != vars.len()) {
            return Err(Error::InvalidAction(
                "outcome does not assign exactly the action variables",
            ));
        }
        if outcomes.iter().any(|(p, _)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidAction("outcome probability must be positive"));
        }
        let total: f64 = outcomes.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PROB_EPS {
            return Err(Error::InvalidAction("outcome probabilities do not sum to 1"));
        }
        Ok(Self { vars, outcomes })
    }

    /// Deterministic action with a single outcome.
    pub fn assign(pairs: &[(VarId, Value)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|&(v, _)| v).collect(),
            alloc::vec![(1.0, pairs.iter().map(|&(_, u)| u).collect())],
        )
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn var_set(&self) -> VarSet {
        self.vars.iter().copied().collect()
    }

    pub fn outcomes(&self) -> &[(f64, Vec<Value>)] {
        &self.outcomes
    }

    /// Outcome `i` as a partial state over the action variables.
    pub fn outcome_state(&self, i: usize) -> PhysicalState {
        PhysicalState::from_pairs(
            self.vars
                .iter()
                .copied()
                .zip(self.outcomes[i].1.iter().copied()),
        )
    }

    pub fn check_within(&self, universe: &VarSet) -> Result<()> {
        match self.vars.iter().find(|v| !universe.contains(**v)) {
            Some(&v) => Err(Error::UnknownVariable(v)),
            None => Ok(()),
        }
    }
}
