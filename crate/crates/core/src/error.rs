use thiserror::Error;

use crate::skeleton::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("position {0:?} lies outside the map bounds")]
    OutOfBounds([f64; 3]),
    #[error("ray direction has zero length")]
    ZeroDirection,
    #[error("unknown skeleton node {0}")]
    UnknownNode(NodeId),
    #[error("node path is not connected between {0} and {1}")]
    DisconnectedPath(NodeId, NodeId),
    #[error("node path is empty")]
    EmptyPath,
    #[error("cost matrix is empty")]
    EmptyMatrix,
    #[error("no reachable region remains: exploration stalled")]
    Stalled,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("snapshot format error: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
