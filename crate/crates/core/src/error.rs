use thiserror::Error;

use crate::tree::{NodeId, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {0} is the root and has no parent")]
    RootNode(NodeId),
    #[error("node {0} is not a valid node of this tree")]
    InvalidNode(NodeId),
    #[error("node {node} has no {side} child to rotate with")]
    MissingChild { node: NodeId, side: Side },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("instance of size {n} exceeds the configured cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("root table is not monotone at range {i}..={j}")]
    NonMonotoneRoots { i: usize, j: usize },
    #[error("invariant violated at node {node}: {violation}")]
    Invalid { node: NodeId, violation: Violation },
}

/// A broken structural invariant found by [`WeightedTree::validate`].
///
/// [`WeightedTree::validate`]: crate::tree::WeightedTree::validate
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Violation {
    #[error("tree has no nodes")]
    Empty,
    #[error("root has a parent")]
    RootHasParent,
    #[error("child link does not point back to this parent")]
    ParentLink,
    #[error("child index out of range")]
    DanglingChild,
    #[error("node reached twice during traversal")]
    Cycle,
    #[error("node is not reachable from the root")]
    Unreachable,
    #[error("in-order traversal is out of key order")]
    KeyOrder,
    #[error("weight is negative or not finite")]
    BadWeight,
    #[error("stored subtree weight {stored} differs from recomputed {actual}")]
    SubtreeWeight { stored: f64, actual: f64 },
    #[error("total weight {0} is not 1")]
    TotalWeight(f64),
}
