use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::artifacts::{read_json, sha256_bytes, write_file};
use super::{
    geo_stage, hon_stage, ingest_stage, rank_stage, report, sha256_file, ArtifactLayout, Manifest, PipelineConfig,
    PipelineError, StageRecord, StageStatus,
};
use crate::corpus::CitationGraph;
use crate::geo::BinFilter;
use crate::hon::HigherOrderGraph;

const STAGES: [&str; 5] = ["ingest", "geo", "hon", "rank", "report"];

fn config_digest<T: Serialize>(value: &T) -> String {
    sha256_bytes(&serde_json::to_vec(value).expect("config serialises"))
}

/// Digests of every file in a stage directory, keyed by file name.
fn output_digests(layout: &ArtifactLayout, stage: &str) -> Result<BTreeMap<String, String>, PipelineError> {
    let dir = layout.stage_dir(stage);
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| PipelineError::io(&dir, e))?;
        let path = entry.path();
        if path.is_file() {
            out.insert(entry.file_name().to_string_lossy().into_owned(), sha256_file(&path)?);
        }
    }
    Ok(out)
}

fn input_digests(
    cfg: &PipelineConfig,
    layout: &ArtifactLayout,
    stage: &str,
) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut m = BTreeMap::new();
    let mut file = |key: &str, path: &Path| -> Result<(), PipelineError> {
        if path.is_file() {
            m.insert(key.to_string(), sha256_file(path)?);
        }
        Ok(())
    };
    match stage {
        "ingest" => {
            if let Some(p) = &cfg.ingest.papers {
                file("papers", p)?;
            }
            if let Some(p) = &cfg.ingest.coords {
                file("coords", p)?;
            }
            m.insert("config".into(), config_digest(&(&cfg.ingest, cfg.seed)));
        }
        "geo" => {
            file("ingest/graph.json", &layout.file("ingest", "graph.json"))?;
            m.insert("config".into(), config_digest(&cfg.geo));
        }
        "hon" => {
            file("ingest/graph.json", &layout.file("ingest", "graph.json"))?;
            m.insert("config".into(), config_digest(&(&cfg.hon, cfg.seed)));
        }
        "rank" => {
            file("ingest/graph.json", &layout.file("ingest", "graph.json"))?;
            file("hon/hon_graph.json", &layout.file("hon", "hon_graph.json"))?;
            m.insert("config".into(), config_digest(&cfg.rank));
        }
        _ => {
            for (stage, name) in [
                ("ingest", "ingest_report.json"),
                ("geo", "geo_report.json"),
                ("hon", "hon_report.json"),
                ("rank", "rank_report.json"),
                ("rank", "rankings.csv"),
            ] {
                file(&format!("{stage}/{name}"), &layout.file(stage, name))?;
            }
            m.insert("config".into(), config_digest(&cfg.rank.top));
        }
    }
    Ok(m)
}

fn read_graph(layout: &ArtifactLayout) -> Result<CitationGraph, PipelineError> {
    let path = layout.require("ingest", "graph.json")?;
    let f = std::fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?;
    Ok(CitationGraph::read_json(std::io::BufReader::new(f))?)
}

fn read_hon(layout: &ArtifactLayout) -> Result<HigherOrderGraph, PipelineError> {
    let path = layout.require("hon", "hon_graph.json")?;
    let f = std::fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?;
    Ok(HigherOrderGraph::read_json(std::io::BufReader::new(f))?)
}

fn run_stage(cfg: &PipelineConfig, layout: &ArtifactLayout, stage: &str) -> Result<(), PipelineError> {
    match stage {
        "ingest" => ingest_stage(&cfg.ingest, cfg.seed, layout).map(drop),
        "geo" => geo_stage(&read_graph(layout)?, &cfg.geo, &BinFilter::ALL, true, layout).map(drop),
        "hon" => hon_stage(&read_graph(layout)?, &cfg.hon, cfg.seed, layout).map(drop),
        "rank" => rank_stage(&read_hon(layout)?, Some(&read_graph(layout)?), &cfg.rank, layout).map(drop),
        _ => {
            let text = report(&layout.root)?;
            let path = layout.file("report", "summary.txt");
            write_file(&path, |w| {
                std::io::Write::write_all(w, text.as_bytes()).map_err(|e| PipelineError::io(&path, e))
            })
        }
    }
}

fn reusable(
    prev: Option<&StageRecord>,
    inputs: &BTreeMap<String, String>,
    layout: &ArtifactLayout,
    stage: &str,
) -> bool {
    let Some(prev) = prev else { return false };
    if !matches!(prev.status, StageStatus::Completed | StageStatus::Reused) || &prev.inputs != inputs {
        return false;
    }
    match output_digests(layout, stage) {
        Ok(now) => now == prev.outputs,
        Err(_) => false,
    }
}

/// Runs every stage in order and writes `config.toml` and `manifest.json`.
///
/// With `resume`, a stage whose recorded inputs and outputs are unchanged is
/// marked reused instead of recomputed. On failure the manifest records the
/// failing stage, earlier artifacts are kept, and the error is returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    let cfg = cfg.clone().effective();
    cfg.validate()?;
    let layout = ArtifactLayout::new(&cfg.output_dir);
    let config_text = cfg.to_toml_string();
    let config_path = layout.config();
    write_file(&config_path, |w| {
        std::io::Write::write_all(w, config_text.as_bytes()).map_err(|e| PipelineError::io(&config_path, e))
    })?;

    let previous: Option<Manifest> =
        if cfg.resume && layout.manifest().is_file() { read_json(&layout.manifest()).ok() } else { None };

    let mut manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_sha256: sha256_bytes(config_text.as_bytes()),
        stages: Vec::new(),
        failed_stage: None,
    };
    let mut failure = None;
    for stage in STAGES {
        if failure.is_some() {
            manifest.stages.push(StageRecord {
                name: stage.into(),
                status: StageStatus::NotRun,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                error: None,
            });
            continue;
        }
        let outcome = input_digests(&cfg, &layout, stage).and_then(|inputs| {
            let status = if reusable(previous.as_ref().and_then(|m| m.stage(stage)), &inputs, &layout, stage) {
                log::info!("{stage}: inputs unchanged, reusing outputs");
                StageStatus::Reused
            } else {
                log::info!("{stage}: running");
                run_stage(&cfg, &layout, stage)?;
                StageStatus::Completed
            };
            Ok((inputs, status))
        });
        match outcome.and_then(|(inputs, status)| Ok((inputs, status, output_digests(&layout, stage)?))) {
            Ok((inputs, status, outputs)) => {
                manifest.stages.push(StageRecord { name: stage.into(), status, inputs, outputs, error: None })
            }
            Err(e) => {
                log::error!("{stage} failed: {e}");
                manifest.stages.push(StageRecord {
                    name: stage.into(),
                    status: StageStatus::Failed,
                    inputs: BTreeMap::new(),
                    outputs: BTreeMap::new(),
                    error: Some(e.to_string()),
                });
                manifest.failed_stage = Some(stage.into());
                failure = Some(e);
            }
        }
    }
    super::artifacts::write_json(&layout.manifest(), &manifest)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}
