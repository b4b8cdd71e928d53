//! Shared error type for the core crate.

use std::path::PathBuf;

use crate::option_graph::NodeId;

/// Errors produced by pool operations, inference, learning, and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector argument does not match the pool's observation dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A node id does not resolve in the pool.
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    /// An operation that requires an interior node was given an action leaf.
    #[error("node {0} is an action leaf, not an interior node")]
    NotInterior(NodeId),

    /// The pool holds no interior node yet; the caller must accommodate first.
    #[error("pool has no interior node to match against")]
    NoSchema,

    /// No action leaf is reachable from the selected node.
    #[error("no action leaf reachable from node {0}")]
    NoAction(NodeId),

    /// An argument violates a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// No environment is registered under this name.
    #[error("unknown environment {0:?} (expected cartpole-v0, pendulum-v0, or acrobot-v1)")]
    UnknownEnvironment(String),

    /// An environment was stepped after its episode finished.
    #[error("environment stepped after the episode terminated")]
    EpisodeDone,

    /// Filesystem failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but its contents do not parse.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
