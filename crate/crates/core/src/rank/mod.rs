//! Classical PageRank and the two-register quantum-walk PageRank over a
//! column-stochastic transition matrix, plus ranking comparisons.

mod compare;
mod pagerank;
mod quantum;

pub use compare::{
    compare_rankings, rank_positions, self_citation_weight_report, SelfCitationWeight, TieGroup, TieReport, WalkView,
};
pub use pagerank::classical_pagerank;
pub use quantum::{
    impact_scores, prepare_initial_state, step_probabilities, unitarity_defect, ImpactScores, QuantumWalkState,
    ScoreSeries, WalkOperator, DEFAULT_MAX_NODES, DEFAULT_STEPS, DENSE_MAX_NODES,
};

use thiserror::Error;

use crate::hon::HonError;

/// Default tolerance under which two scores count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("power iteration did not reach tolerance after {iterations} iterations (last change {change:e})")]
    NotConverged { iterations: usize, change: f64, last: Vec<f64> },
    #[error("{n} nodes exceed the walk cap of {cap}; extract a top-k subgraph first")]
    TooLarge { n: usize, cap: usize },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("score vectors differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("base map entry {0} out of range")]
    BaseMap(usize),
    #[error("at least one step is required")]
    NoSteps,
    #[error(transparent)]
    Matrix(#[from] HonError),
}
