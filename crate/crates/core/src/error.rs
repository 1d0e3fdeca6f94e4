use crate::store::NodeRef;
use crate::var::VarId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("AND children share variable {0}")]
    OverlappingSubspaces(VarId),
    #[error("OR children range over different variable sets")]
    MismatchedSubspaces,
    #[error("OR edge weight {0} is not a positive finite number")]
    InvalidWeight(f64),
    #[error("OR node needs at least one child")]
    EmptyOr,
    #[error("unknown node {0:?}")]
    UnknownNode(NodeRef),
    #[error("belief states range over different universes")]
    MismatchedUniverse,
    #[error("union weight {0} outside (0, 1)")]
    InvalidUnionWeight(f64),
    #[error("state does not assign variable {0}")]
    PartialAssignment(VarId),
    #[error("variable {0} is not part of the universe")]
    UnknownVariable(VarId),
    #[error("constraint on {0} allows no value")]
    EmptyConstraint(VarId),
    #[error("invalid action: {0}")]
    InvalidAction(&'static str),
    #[error("expansion exceeds {cap} states")]
    ExpansionTooLarge { cap: usize },
    #[error("node {0:?} is not labeled mixed")]
    NotMixed(NodeRef),
    #[error("total probability mass {0} deviates from 1")]
    MassLeak(f64),
    #[error("value {value} of {var} outside 0..{domain}")]
    ValueOutOfRange { var: VarId, value: i64, domain: u32 },
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(&'static str),
}
