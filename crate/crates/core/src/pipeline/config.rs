use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{AffiliationStrategy, SynthConfig};
use crate::geo::DEFAULT_WEIGHT_FLOOR;
use crate::hon::HonConfig;
use crate::rank::{DEFAULT_MAX_NODES, DEFAULT_STEPS, DEFAULT_TIE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Line-delimited papers file; the synthetic generator is used when absent.
    pub papers: Option<PathBuf>,
    /// Coordinate cache CSV, read first and updated with new resolutions.
    pub coords: Option<PathBuf>,
    pub geocode: bool,
    pub strategy: AffiliationStrategy,
    pub weight_floor: f64,
    pub synth: SynthConfig,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            papers: None,
            coords: None,
            geocode: false,
            strategy: AffiliationStrategy::FirstAuthor,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeoConfig {
    pub bin_width_km: f64,
    pub dbscan_eps_km: f64,
    pub dbscan_min_pts: usize,
    pub fit: bool,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self { bin_width_km: 100.0, dbscan_eps_km: 50.0, dbscan_min_pts: 5, fit: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub alpha: f64,
    pub steps: usize,
    /// L1 tolerance of classical power iteration.
    pub tol: f64,
    pub max_iter: usize,
    pub tie_tol: f64,
    pub max_nodes: usize,
    pub emit_series: bool,
    /// Rows in the summary table.
    pub top: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            steps: DEFAULT_STEPS,
            tol: 1e-12,
            max_iter: 10_000,
            tie_tol: DEFAULT_TIE_TOL,
            max_nodes: DEFAULT_MAX_NODES,
            emit_series: true,
            top: 10,
        }
    }
}

/// Everything a run needs. The effective value is written to `config.toml`
/// in the artifact directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Drives every random choice; copied into `ingest.synth.seed`.
    pub seed: u64,
    pub log_level: String,
    pub output_dir: PathBuf,
    /// Reuse stage outputs whose inputs are unchanged.
    pub resume: bool,
    pub ingest: IngestConfig,
    pub geo: GeoConfig,
    pub hon: HonConfig,
    pub rank: RankConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            log_level: "info".into(),
            output_dir: PathBuf::from("artifacts"),
            resume: false,
            ingest: IngestConfig::default(),
            geo: GeoConfig::default(),
            hon: HonConfig::default(),
            rank: RankConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.ingest.synth.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Applies the global seed to the stages that carry their own.
    pub fn effective(mut self) -> Self {
        self.ingest.synth.seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if !(self.rank.alpha > 0.0 && self.rank.alpha <= 1.0) {
            return bad("rank.alpha must lie in (0, 1]");
        }
        if self.rank.steps == 0 {
            return bad("rank.steps must be at least 1");
        }
        if !(self.rank.tol > 0.0) || !(self.rank.tie_tol >= 0.0) {
            return bad("rank tolerances must be positive");
        }
        if !(self.geo.bin_width_km > 0.0) || !(self.geo.dbscan_eps_km > 0.0) || self.geo.dbscan_min_pts == 0 {
            return bad("geo.bin_width_km and geo.dbscan_eps_km must be positive and geo.dbscan_min_pts at least 1");
        }
        if self.hon.order == 0 || self.hon.walks_per_node == 0 || self.hon.max_len == 0 {
            return bad("hon.order, hon.walks_per_node and hon.max_len must be at least 1");
        }
        if !(self.ingest.weight_floor > 0.0 && self.ingest.weight_floor < 1.0) {
            return bad("ingest.weight_floor must lie in (0, 1)");
        }
        Ok(())
    }
}
