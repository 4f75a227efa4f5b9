use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop ({0}, {0}) is not allowed")]
    SelfLoop(NodeId),
    #[error("probability {value} outside the allowed range for {what}")]
    Probability { what: &'static str, value: f64 },
    #[error("graph size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("activation times out of order: t_u = {t_u} is not before t_v = {t_v}")]
    TimeOrder { t_u: f64, t_v: f64 },
    #[error("cascade {cascade} activates node {node} more than once")]
    DuplicateNode { cascade: u32, node: NodeId },
    #[error("cascade {0} has no events")]
    EmptyCascade(u32),
    #[error("cascade with {0} nodes is too large for exhaustive enumeration")]
    TooLargeForEnumeration(usize),
    #[error("transmission edge ({0}, {1}) is not an edge of the graph")]
    TreeEdgeNotInGraph(NodeId, NodeId),
    #[error("department {0} has no nodes")]
    UnknownDepartment(u32),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("degenerate evaluation: {0}")]
    Degenerate(&'static str),
    #[error("chain configuration mismatch: {0}")]
    ConfigMismatch(&'static str),
    #[error("delta was computed for a different likelihood state")]
    StaleDelta,
    #[error("initial graph has zero likelihood")]
    InfeasibleInitialState,
}
