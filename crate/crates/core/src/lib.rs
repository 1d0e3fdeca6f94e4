//! And-Or belief states.
//!
//! A discrete probabilistic belief state stored as a hash-consed DAG of
//! literal, AND (Cartesian product) and OR (weighted union) nodes. Actions
//! with probabilistic outcomes are applied to condition-selected substates
//! directly on the graph, keeping it compact.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use aobs_core::{acting, query, Action, Condition, PhysicalState, Store, VarId, VarSet};
//!
//! let mut store = Store::new();
//! let universe = VarSet::full(3);
//! let s = store
//!     .from_physical_state(&PhysicalState::from_values(&[0, 0, 0]), &universe)
//!     .unwrap();
//! let grasp = Action::new(
//!     vec![VarId(1), VarId(2)],
//!     vec![(0.8, vec![1, 0]), (0.2, vec![0, 1])],
//! )
//! .unwrap();
//! let s = acting::apply_action(&mut store, &s, &Condition::always(), &grasp)
//!     .unwrap()
//!     .state;
//! let grasped = Condition::always().with(VarId(1), [1]).unwrap();
//! let p = query::probability(&store, &s, &grasped).unwrap();
//! assert!((p - 0.8).abs() < 1e-12);
//! ```

#![no_std]

extern crate alloc;

pub mod acting;
pub mod bdd;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod query;
pub mod script;
pub mod store;
pub mod var;

pub use error::{Error, Result};
pub use oracle::TabularPbs;
pub use store::{Aobs, Node, NodeRef, SizeStats, Store};
pub use var::{Action, Condition, PhysicalState, Value, VarId, VarSet};

/// Tolerance for probability mass checks.
pub const PROB_EPS: f64 = 1e-9;
