//! Error type shared by every module of the library.

use thiserror::Error;

/// Errors produced by graph loading, operator construction, and the
/// ranking/centrality/similarity/recommendation algorithms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("negative edge weight {weight} on line {line}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("graph must contain at least one node")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("unknown node label: {label}")]
    UnknownLabel { label: String },
    #[error("dangling nodes (no out-going links) with policy `error`: {}", labels.join(", "))]
    DanglingNodes { labels: Vec<String> },
    #[error("operation requires an undirected graph, but edges are not symmetric (e.g. {from}->{to})")]
    NotSymmetric { from: String, to: String },
    #[error("operation requires a connected graph; {count} of {total} nodes unreachable from {root}")]
    Disconnected {
        root: String,
        count: usize,
        total: usize,
    },
    #[error("graph contains a cycle involving {label}; operation requires a DAG")]
    NotAcyclic { label: String },
    #[error("did not converge within {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
        /// The iterate at the point of giving up, for diagnosis.
        last: Vec<f64>,
    },
    #[error("graph has {n} nodes, above the dense-solve threshold {threshold}; use the iterative method")]
    DenseSizeExceeded { n: usize, threshold: usize },
    #[error("nodes cannot reach any sink: {}", labels.join(", "))]
    SinksUnreachable { labels: Vec<String> },
    #[error("sink set is empty or covers the whole graph ({sinks} sinks, {total} nodes)")]
    BadPartition { sinks: usize, total: usize },
    #[error("nodes with fewer than {min_returns} recorded returns: {}; raise walk_steps", labels.join(", "))]
    InsufficientSamples {
        min_returns: usize,
        labels: Vec<String>,
    },
    #[error("no prediction possible for user {user} on item {item}: no similar user rated it")]
    NoPrediction { user: String, item: String },
    #[error("user {user} has collected nothing; diffusion needs at least one item")]
    ColdStart { user: String },
    #[error("parameter {name} out of range: {value} (expected {expected})")]
    BadParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("stochastic operation requires an explicit seed")]
    SeedRequired,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad input (files, parameters, labels):
    /// the CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. }
                | Error::SinksUnreachable { .. }
                | Error::InsufficientSamples { .. }
                | Error::NoPrediction { .. }
        )
    }
}
