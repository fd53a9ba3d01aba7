//! Higher-order citation network: chains sampled by weighted random walk,
//! conditional successor counts, K-L based detection of context-dependent
//! nodes, rewiring, and the damped column-stochastic transition matrix.
//!
//! A node path is written oldest step first with the current paper last, so
//! `[a, b]` is paper `b` reached from `a`. Its label is `b|a`, context most
//! recent first.

mod chains;
mod counts;
mod detect;
mod matrix;
mod rewire;

pub use chains::{sample_citation_chains, CitationChain, FirstOrderGraph, Weighting};
pub use counts::{conditional_probability, count_subchains, kl_divergence, ConditionalCounts, LogBase};
pub use detect::{detect_higher_order, HigherOrderNode, MinSupport};
pub use matrix::{build_transition_matrix, StochasticMatrix};
pub use rewire::{rewire, HigherOrderGraph, HonEdge};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CitationGraph;

#[derive(Debug, Error, PartialEq)]
pub enum HonError {
    #[error("context {0:?} has zero support")]
    ZeroSupport(Vec<usize>),
    #[error("divergence undefined: lower distribution is zero at index {0} where higher is positive")]
    UndefinedDivergence(usize),
    #[error("distributions have different lengths ({0} vs {1})")]
    Mismatch(usize, usize),
    #[error("higher-order node {0} has no in-edge after rewiring")]
    Orphan(String),
    #[error("higher-order node {0} refers to an edge missing from the graph")]
    MissingEdge(String),
    #[error("transition matrix of an empty graph")]
    EmptyGraph,
    #[error("damping alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("column {col} sums to {sum}, not 1")]
    NotStochastic { col: usize, sum: f64 },
    #[error("negative or non-finite entry at ({row}, {col})")]
    BadEntry { row: usize, col: usize },
    #[error("matrix data has {got} entries, expected {expected}")]
    Shape { got: usize, expected: usize },
    #[error("higher-order graph file: {0}")]
    Format(String),
}

/// Parameters of the whole higher-order stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HonConfig {
    pub order: usize,
    pub walks_per_node: usize,
    pub max_len: usize,
    pub min_support: MinSupport,
    pub log_base: LogBase,
    pub weighting: Weighting,
    /// Restrict to the most-cited papers before sampling; `None` keeps all.
    pub top_k: Option<usize>,
}

impl Default for HonConfig {
    fn default() -> Self {
        Self {
            order: 3,
            walks_per_node: 100,
            max_len: 10,
            min_support: MinSupport::At(50),
            log_base: LogBase::Natural,
            weighting: Weighting::Geographic,
            top_k: None,
        }
    }
}

/// Summary of one higher-order build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonSummary {
    pub chains: usize,
    pub contexts: usize,
    pub detected: usize,
    pub nodes: usize,
    pub edges: usize,
}

/// Sample, count, detect and rewire in one call. `cfg.top_k` is ignored;
/// callers extract the subgraph first.
pub fn build_higher_order(
    graph: &CitationGraph,
    cfg: &HonConfig,
    seed: u64,
) -> Result<(HigherOrderGraph, HonSummary), HonError> {
    let first = FirstOrderGraph::from_citation_graph(graph, cfg.weighting);
    let chains = sample_citation_chains(&first, cfg.walks_per_node, cfg.max_len, seed);
    let counts = count_subchains(&chains, cfg.order.max(1));
    let detected = detect_higher_order(&counts, cfg.order, cfg.min_support, cfg.log_base);
    let hog = rewire(&first, &counts, &detected)?;
    let summary = HonSummary {
        chains: chains.len(),
        contexts: counts.len(),
        detected: detected.len(),
        nodes: hog.node_count(),
        edges: hog.edges.len(),
    };
    Ok((hog, summary))
}
