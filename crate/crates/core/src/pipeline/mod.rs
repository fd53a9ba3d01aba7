//! Stage orchestration: ingest → geo → hon → rank → report, each reading its
//! inputs from and writing its outputs to a fixed artifact layout.
//!
//! ```text
//! <out>/config.toml      effective configuration
//! <out>/manifest.json    digests, seed, version, per-stage status
//! <out>/ingest/          papers.jsonl, institutions.csv, graph.json, ingest_report.json
//! <out>/geo/             bins_<filter>.csv, fit_<filter>.json, clusters.csv, bins_clustered_all.csv, geo_report.json
//! <out>/hon/             hon_graph.json, hon_edges.csv, hon_report.json
//! <out>/rank/            rankings.csv, series.csv, ties_*.json, self_citations.csv, rank_report.json
//! <out>/report/          summary.txt
//! ```

mod artifacts;
mod config;
mod report;
mod run;
mod stages;

pub use artifacts::{sha256_file, ArtifactLayout, Manifest, StageRecord, StageStatus};
pub use config::{GeoConfig, IngestConfig, PipelineConfig, RankConfig};
pub use report::report;
pub use run::run_pipeline;
pub use stages::{
    compare_score_files, geo_stage, hon_stage, ingest_stage, rank_stage, read_rankings, ClusterSummary, FitOutcome,
    GeoReport, HonReport, IngestReport, RankReport, RankingRow, TieSummary, WalkSummary,
};

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::geo::GeoError;
use crate::hon::HonError;
use crate::rank::RankError;

/// Process exit status for an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{stage} artifacts missing: {path}")]
    MissingArtifacts { stage: &'static str, path: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Hon(#[from] HonError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            PipelineError::Config(_) => ExitCode::Usage,
            PipelineError::Rank(RankError::TooLarge { .. } | RankError::Length(..) | RankError::BaseMap(_)) => {
                ExitCode::Data
            }
            PipelineError::Rank(_) => ExitCode::Numeric,
            PipelineError::Hon(
                HonError::NotStochastic { .. }
                | HonError::BadEntry { .. }
                | HonError::UndefinedDivergence(_)
                | HonError::Alpha(_),
            ) => ExitCode::Numeric,
            _ => ExitCode::Data,
        }
    }
}
