//! JSON documents for belief states, conditions and actions.
//!
//! A state names its variables in `universe` and gives the graph either as a
//! nested `root` node or as weighted `rows` of physical states:
//!
//! ```json
//! {
//!   "universe": ["a", "b", {"name": "c", "domain": 3}],
//!   "root": {"and": [
//!     {"lit": {"var": "a", "value": 0}},
//!     {"or": [{"lit": {"var": "b", "value": 0}}, {"lit": {"var": "b", "value": 1}}],
//!      "weights": [0.4, 0.6]},
//!     {"ref": "c0"}
//!   ]},
//!   "defs": {"c0": {"lit": {"var": "c", "value": 2}}}
//! }
//! ```
//!
//! Conditions map variable names to allowed values (`{"b": [1], "c": [0]}`);
//! actions list their variables and outcomes
//! (`{"vars": ["b"], "outcomes": [{"p": 0.7, "values": [1]}, ...]}`).

use std::collections::{BTreeMap, HashMap, HashSet};

use aobs_core::acting::normalize;
use aobs_core::optimize::{greedy_optimize, DEFAULT_NODE_COST, DEFAULT_THRESHOLD};
use aobs_core::store::NodeMap;
use aobs_core::{Action, Aobs, Condition, Node, NodeRef, PhysicalState, Store, Value, VarId, VarSet, PROB_EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown variable `{0}`")]
    UnknownName(String),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] aobs_core::Error),
}

type Result<T> = std::result::Result<T, FormatError>;

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(FormatError::Schema(msg.into()))
}

/// Variable names, indexed by [`VarId`], with optional domain sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    names: Vec<String>,
    domains: Vec<Option<u32>>,
    index: HashMap<String, VarId>,
}

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_domains(names.into_iter().map(|n| (n.into(), None)))
    }

    pub fn with_domains<I: IntoIterator<Item = (String, Option<u32>)>>(vars: I) -> Result<Self> {
        let mut u = Universe {
            names: Vec::new(),
            domains: Vec::new(),
            index: HashMap::new(),
        };
        for (name, domain) in vars {
            if domain == Some(0) {
                return schema(format!("variable `{name}` has an empty domain"));
            }
            let id = VarId(u.names.len() as u32);
            if u.index.insert(name.clone(), id).is_some() {
                return schema(format!("variable `{name}` declared twice"));
            }
            u.names.push(name);
            u.domains.push(domain);
        }
        Ok(u)
    }

    /// Variables `v0, v1, ..`.
    pub fn numbered(n: u32) -> Self {
        Self::new((0..n).map(|i| format!("v{i}"))).expect("names are distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| FormatError::UnknownName(name.to_owned()))
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn domain(&self, v: VarId) -> Option<u32> {
        self.domains[v.index()]
    }

    pub fn var_set(&self) -> VarSet {
        VarSet::full(self.len())
    }

    fn check_value(&self, v: VarId, u: Value) -> Result<()> {
        let ok = match self.domain(v) {
            Some(d) => (0..i64::from(d)).contains(&u),
            None => u >= 0,
        };
        if ok {
            Ok(())
        } else {
            schema(format!("value {u} out of range for `{}`", self.name(v)))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum VarDecl {
    Name(String),
    Full {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<u32>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct LitDoc {
    var: String,
    value: Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Lit {
        lit: LitDoc,
    },
    And {
        and: Vec<NodeDoc>,
    },
    Or {
        or: Vec<NodeDoc>,
        weights: Vec<f64>,
    },
    Ref {
        #[serde(rename = "ref")]
        name: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct RowDoc {
    p: f64,
    state: BTreeMap<String, Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    universe: Vec<VarDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<NodeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    defs: BTreeMap<String, NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<RowDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDoc {
    p: f64,
    values: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    vars: Vec<String>,
    outcomes: Vec<OutcomeDoc>,
}

struct Resolver<'a> {
    universe: &'a Universe,
    defs: &'a BTreeMap<String, NodeDoc>,
    done: HashMap<String, NodeRef>,
    active: HashSet<String>,
}

impl Resolver<'_> {
    fn build(&mut self, store: &mut Store, doc: &NodeDoc) -> Result<NodeRef> {
        Ok(match doc {
            NodeDoc::Lit { lit } => {
                let v = self.universe.var(&lit.var)?;
                self.universe.check_value(v, lit.value)?;
                store.make_lit(v, lit.value)
            }
            NodeDoc::And { and } => {
                let kids = and.iter().map(|k| self.build(store, k)).collect::<Result<Vec<_>>>()?;
                store.make_and(kids)?
            }
            NodeDoc::Or { or, weights } => {
                if or.len() != weights.len() {
                    return schema("`or` and `weights` differ in length");
                }
                let mut edges = Vec::with_capacity(or.len());
                for (k, &w) in or.iter().zip(weights) {
                    edges.push((w, self.build(store, k)?));
                }
                store.make_or(edges)?
            }
            NodeDoc::Ref { name } => {
                if let Some(&r) = self.done.get(name) {
                    return Ok(r);
                }
                let Some(def) = self.defs.get(name) else {
                    return schema(format!("undefined reference `{name}`"));
                };
                if !self.active.insert(name.clone()) {
                    return schema(format!("reference cycle through `{name}`"));
                }
                let r = self.build(store, def)?;
                self.active.remove(name);
                self.done.insert(name.clone(), r);
                r
            }
        })
    }
}

/// Parses a state document into `store`.
pub fn read_state(store: &mut Store, text: &str) -> Result<(Universe, Aobs)> {
    let doc: StateDoc = serde_json::from_str(text)?;
    let universe = Universe::with_domains(doc.universe.into_iter().map(|d| match d {
        VarDecl::Name(name) => (name, None),
        VarDecl::Full { name, domain } => (name, domain),
    }))?;
    if universe.is_empty() {
        return schema("empty universe");
    }
    let s = match (&doc.root, &doc.rows) {
        (Some(root), None) => {
            let mut r = Resolver {
                universe: &universe,
                defs: &doc.defs,
                done: HashMap::new(),
                active: HashSet::new(),
            };
            let root = r.build(store, root)?;
            let s = Aobs::new(store, root);
            let mass = store.mass(root);
            if (mass - 1.0).abs() > PROB_EPS {
                return schema(format!("total probability is {mass}, expected 1"));
            }
            s
        }
        (None, Some(rows)) => from_rows(store, &universe, rows)?,
        _ => return schema("exactly one of `root` and `rows` is required"),
    };
    if s.universe != universe.var_set() {
        return schema("state does not assign every variable of the universe");
    }
    Ok((universe, s))
}

/// Tabular input: each row becomes a physical state, joined by weighted
/// unions, then normalized and greedily factored.
fn from_rows(store: &mut Store, universe: &Universe, rows: &[RowDoc]) -> Result<Aobs> {
    let all = universe.var_set();
    let mut acc: Option<(f64, Aobs)> = None;
    for row in rows {
        if !(row.p > 0.0 && row.p.is_finite()) {
            return schema(format!("row probability {} is not positive", row.p));
        }
        let mut pairs = Vec::with_capacity(row.state.len());
        for (name, &u) in &row.state {
            let v = universe.var(name)?;
            universe.check_value(v, u)?;
            pairs.push((v, u));
        }
        let s = store.from_physical_state(&PhysicalState::from_pairs(pairs), &all)?;
        acc = Some(match acc {
            None => (row.p, s),
            Some((mass, prev)) => {
                let total = mass + row.p;
                (total, store.union_roots(&prev, &s, mass / total)?)
            }
        });
    }
    let Some((mass, s)) = acc else {
        return schema("`rows` is empty");
    };
    if (mass - 1.0).abs() > PROB_EPS {
        return schema(format!("row probabilities sum to {mass}, expected 1"));
    }
    let s = normalize(store, &s)?;
    Ok(greedy_optimize(store, &s, DEFAULT_NODE_COST, DEFAULT_THRESHOLD)?)
}

/// Serializes `s`. Nodes with several parents go to `defs`, named by their
/// hash; everything else is nested.
pub fn write_state(store: &Store, universe: &Universe, s: &Aobs) -> String {
    let order = store.reachable(s.root);
    let mut parents: NodeMap<u32> = NodeMap::default();
    for &n in &order {
        for k in store.node(n).children() {
            *parents.entry(k).or_default() += 1;
        }
    }
    let shared: HashSet<NodeRef> = order
        .iter()
        .copied()
        .filter(|n| parents.get(n).copied().unwrap_or(0) > 1 && !store.node(*n).is_lit())
        .collect();
    let mut defs = BTreeMap::new();
    for &n in &shared {
        defs.insert(def_name(n), node_doc(store, universe, n, &shared, false));
    }
    let doc = StateDoc {
        universe: (0..universe.len())
            .map(|i| {
                let v = VarId(i as u32);
                match universe.domain(v) {
                    None => VarDecl::Name(universe.name(v).to_owned()),
                    Some(d) => VarDecl::Full {
                        name: universe.name(v).to_owned(),
                        domain: Some(d),
                    },
                }
            })
            .collect(),
        root: Some(node_doc(store, universe, s.root, &shared, false)),
        defs,
        rows: None,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("state documents serialize");
    out.push('\n');
    out
}

fn def_name(n: NodeRef) -> String {
    format!("n{:016x}", n.0)
}

fn node_doc(store: &Store, u: &Universe, n: NodeRef, shared: &HashSet<NodeRef>, as_ref: bool) -> NodeDoc {
    if as_ref && shared.contains(&n) {
        return NodeDoc::Ref { name: def_name(n) };
    }
    match store.node(n) {
        Node::Lit { var, value } => NodeDoc::Lit {
            lit: LitDoc {
                var: u.name(*var).to_owned(),
                value: *value,
            },
        },
        Node::And(c) => NodeDoc::And {
            and: c.iter().map(|&k| node_doc(store, u, k, shared, true)).collect(),
        },
        Node::Or(e) => NodeDoc::Or {
            or: e.iter().map(|&(_, k)| node_doc(store, u, k, shared, true)).collect(),
            weights: e.iter().map(|&(w, _)| w).collect(),
        },
    }
}

pub fn read_condition(universe: &Universe, text: &str) -> Result<Condition> {
    let doc: BTreeMap<String, Vec<Value>> = serde_json::from_str(text)?;
    let mut c = Condition::always();
    for (name, allowed) in doc {
        let v = universe.var(&name)?;
        for &u in &allowed {
            universe.check_value(v, u)?;
        }
        c = c.with(v, allowed)?;
    }
    Ok(c)
}

pub fn write_condition(universe: &Universe, c: &Condition) -> String {
    let doc: BTreeMap<&str, Vec<Value>> = c
        .constraints()
        .map(|(v, allowed)| (universe.name(v), allowed.iter().copied().collect()))
        .collect();
    serde_json::to_string(&doc).expect("conditions serialize")
}

pub fn read_action(universe: &Universe, text: &str) -> Result<Action> {
    let doc: ActionDoc = serde_json::from_str(text)?;
    let vars = doc.vars.iter().map(|n| universe.var(n)).collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::with_capacity(doc.outcomes.len());
    for o in doc.outcomes {
        for (&v, &u) in vars.iter().zip(&o.values) {
            universe.check_value(v, u)?;
        }
        outcomes.push((o.p, o.values));
    }
    Ok(Action::new(vars, outcomes)?)
}

pub fn write_action(universe: &Universe, a: &Action) -> String {
    let doc = ActionDoc {
        vars: a.vars().iter().map(|&v| universe.name(v).to_owned()).collect(),
        outcomes: a
            .outcomes()
            .iter()
            .map(|(p, values)| OutcomeDoc {
                p: *p,
                values: values.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("actions serialize")
}
