//! Plain tabular belief states: a list of (probability, state) rows.
//!
//! Deliberately naive. Used as the reference the DAG operations are checked
//! against.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::var::{Action, Condition, PhysicalState, VarSet};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabularPbs {
    rows: Vec<(f64, PhysicalState)>,
}

impl TabularPbs {
    pub fn from_rows(rows: Vec<(f64, PhysicalState)>) -> Self {
        Self { rows }
    }

    /// A single state with certainty.
    pub fn certain(s: PhysicalState) -> Self {
        Self::from_rows(alloc::vec![(1.0, s)])
    }

    pub fn rows(&self) -> &[(f64, PhysicalState)] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<(f64, PhysicalState)> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.rows.iter().map(|(p, _)| p).sum()
    }

    /// Union of the variables assigned by any row.
    pub fn universe(&self) -> VarSet {
        let mut u = VarSet::new();
        for (_, s) in &self.rows {
            u.union_with(&s.vars());
        }
        u
    }

    /// Rows with equal states merged by summing, sorted by state.
    pub fn canonical(&self) -> TabularPbs {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.1.cmp(&b.1));
        let mut out: Vec<(f64, PhysicalState)> = Vec::with_capacity(rows.len());
        for (p, s) in rows {
            match out.last_mut() {
                Some(last) if last.1 == s => last.0 += p,
                _ => out.push((p, s)),
            }
        }
        TabularPbs { rows: out }
    }

    /// Same states, each probability within `eps`. Both sides must be
    /// canonical.
    pub fn approx_eq(&self, other: &TabularPbs, eps: f64) -> bool {
        self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.1 == b.1 && (a.0 - b.0).abs() <= eps)
    }

    /// Probability that `c` holds.
    pub fn prob(&self, c: &Condition) -> Result<f64> {
        if !self.rows.is_empty() {
            c.check_within(&self.universe())?;
        }
        Ok(self
            .rows
            .iter()
            .filter(|(_, s)| c.holds(s))
            .map(|(p, _)| p)
            .sum())
    }

    /// Rows satisfying `c`, not renormalized.
    pub fn select(&self, c: &Condition) -> TabularPbs {
        TabularPbs::from_rows(self.rows.iter().filter(|(_, s)| c.holds(s)).cloned().collect())
    }

    /// Applies `a` to every row satisfying `c`; other rows stay. The result is
    /// canonical.
    pub fn apply_action(&self, c: &Condition, a: &Action) -> Result<TabularPbs> {
        if !self.rows.is_empty() {
            let u = self.universe();
            a.check_within(&u)?;
            c.check_within(&u)?;
        }
        let mut rows = Vec::with_capacity(self.rows.len() * a.outcomes().len());
        for (p, s) in &self.rows {
            if !c.holds(s) {
                rows.push((*p, s.clone()));
                continue;
            }
            for (q, values) in a.outcomes() {
                let mut t = s.clone();
                for (&v, &u) in a.vars().iter().zip(values) {
                    t.set(v, u);
                }
                rows.push((p * q, t));
            }
        }
        Ok(TabularPbs::from_rows(rows).canonical())
    }

    /// Set of states with positive probability.
    pub fn support(&self) -> Vec<PhysicalState> {
        let mut s: Vec<_> = self.rows.iter().map(|(_, s)| s.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Checks that every row assigns exactly the variables of `universe`.
    pub fn check_total(&self, universe: &VarSet) -> Result<()> {
        for (_, s) in &self.rows {
            if let Some(&(v, _)) = s.pairs().iter().find(|(v, _)| !universe.contains(*v)) {
                return Err(Error::UnknownVariable(v));
            }
            if let Some(v) = universe.iter().find(|&v| s.get(v).is_none()) {
                return Err(Error::PartialAssignment(v));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::VarId;
    use alloc::vec;

    fn st(v: &[i64]) -> PhysicalState {
        PhysicalState::from_values(v)
    }

    fn abc() -> TabularPbs {
        TabularPbs::from_rows(vec![
            (0.28, st(&[0, 0, 0])),
            (0.42, st(&[0, 1, 0])),
            (0.12, st(&[0, 0, 1])),
            (0.18, st(&[0, 1, 1])),
        ])
    }

    #[test]
    fn xyz_action() {
        let init = TabularPbs::from_rows(vec![(0.4, st(&[0, 0, 0])), (0.6, st(&[0, 1, 0]))]);
        let a = Action::new(
            vec![VarId(1), VarId(2)],
            vec![(0.7, vec![2, 1]), (0.3, vec![2, 0])],
        )
        .unwrap();
        let out = init.apply_action(&Condition::always(), &a).unwrap();
        let expected =
            TabularPbs::from_rows(vec![(0.7, st(&[0, 2, 1])), (0.3, st(&[0, 2, 0]))]).canonical();
        assert!(out.approx_eq(&expected, 1e-12));
        // input and result differ
        assert!(!out.approx_eq(&init.canonical(), 1e-6));
    }

    #[test]
    fn unmatched_condition_leaves_state() {
        let t = abc();
        let c = Condition::always().with(VarId(0), [1]).unwrap();
        let a = Action::assign(&[(VarId(1), 5)]).unwrap();
        assert!(t.apply_action(&c, &a).unwrap().approx_eq(&t.canonical(), 0.0));
    }

    #[test]
    fn conditional_action() {
        let t = TabularPbs::from_rows(vec![
            (0.2, st(&[0, 0])),
            (0.3, st(&[0, 1])),
            (0.5, st(&[1, 1])),
        ]);
        let c = Condition::always().with(VarId(1), [1]).unwrap();
        let a = Action::assign(&[(VarId(1), 2)]).unwrap();
        let out = t.apply_action(&c, &a).unwrap();
        let expected = TabularPbs::from_rows(vec![
            (0.2, st(&[0, 0])),
            (0.3, st(&[0, 2])),
            (0.5, st(&[1, 2])),
        ]);
        assert!(out.approx_eq(&expected.canonical(), 1e-12));
    }

    #[test]
    fn probabilities() {
        let t = abc();
        let c = Condition::new([(VarId(1), vec![1]), (VarId(2), vec![0])]).unwrap();
        assert!((t.prob(&c).unwrap() - 0.42).abs() < 1e-12);
        assert!((t.prob(&Condition::always()).unwrap() - 1.0).abs() < 1e-12);
        let a1 = Condition::always().with(VarId(0), [1]).unwrap();
        assert_eq!(t.prob(&a1).unwrap(), 0.0);
        let bad = Condition::always().with(VarId(7), [1]).unwrap();
        assert_eq!(t.prob(&bad), Err(Error::UnknownVariable(VarId(7))));
    }

    #[test]
    fn canonical_merges_and_sorts() {
        let s = st(&[1]);
        let t = TabularPbs::from_rows(vec![(0.3, s.clone()), (0.2, s.clone())]).canonical();
        assert_eq!(t.rows().len(), 1);
        assert!((t.rows()[0].0 - 0.5).abs() < 1e-15);

        let mut rows = abc().into_rows();
        rows.reverse();
        rows.swap(0, 2);
        assert_eq!(
            TabularPbs::from_rows(rows).canonical(),
            abc().canonical()
        );
    }

    #[test]
    fn approx_eq_tolerance() {
        let a = TabularPbs::from_rows(vec![(0.7, st(&[0, 2, 1])), (0.3, st(&[0, 2, 0]))])
            .canonical();
        let b = TabularPbs::from_rows(vec![(0.7000000001, st(&[0, 2, 1])), (0.3, st(&[0, 2, 0]))])
            .canonical();
        assert!(a.approx_eq(&b, 1e-6));
        assert!(!a.approx_eq(&b, 1e-12));
        assert!(a.approx_eq(&a, 0.0));
    }
}
