use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

/// Fixed file locations under one artifact directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactLayout {
    pub root: PathBuf,
}

impl ArtifactLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.root.join(stage)
    }

    pub fn file(&self, stage: &str, name: &str) -> PathBuf {
        self.root.join(stage).join(name)
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    /// Path of `stage/name`, or a missing-artifact error naming the stage.
    pub fn require(&self, stage: &'static str, name: &str) -> Result<PathBuf, PipelineError> {
        let p = self.file(stage, name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(PipelineError::MissingArtifacts { stage, path: p.display().to_string() })
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| PipelineError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub(crate) fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Creates parent directories and hands a buffered writer to `body`.
pub(crate) fn write_file<F>(path: &Path, body: F) -> Result<(), PipelineError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), PipelineError>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)?;
    w.flush().map_err(|e| PipelineError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| PipelineError::Data(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| PipelineError::io(path, e))
    })
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Completed,
    /// Outputs from an earlier run were kept because the inputs were unchanged.
    Reused,
    Failed,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    /// Digests of input files plus the stage configuration.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub error: Option<String>,
}

/// Run record. Contains no timestamps so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub stages: Vec<StageRecord>,
    pub failed_stage: Option<String>,
}

impl Manifest {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn succeeded(&self) -> bool {
        self.failed_stage.is_none()
            && self.stages.iter().all(|s| matches!(s.status, StageStatus::Completed | StageStatus::Reused))
    }
}
