//! The run manifest: resolved configuration, per-campaign wall times, and a
//! content digest for every artifact file in the run directory.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentSpec;
use crate::HarnessError;

#[derive(Debug, Serialize)]
pub struct CampaignEntry {
    pub environment: String,
    pub behavior_space: String,
    pub method: String,
    pub seed: u64,
    pub wall_ms: u64,
    pub log: String,
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub code_version: String,
    pub created_utc: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub spec: ExperimentSpec,
    pub campaigns: Vec<CampaignEntry>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(spec: &ExperimentSpec) -> Manifest {
        Manifest {
            schema: "qdtest-run-manifest-v1".into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            status: "complete".into(),
            error: None,
            spec: spec.clone(),
            campaigns: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Digests every file under the run directory (the manifest itself
    /// excluded), then writes `manifest.toml`.
    pub fn write(mut self, run_dir: &Path) -> Result<(), HarnessError> {
        self.campaigns.sort_by(|a, b| {
            (&a.behavior_space, &a.method, a.seed).cmp(&(&b.behavior_space, &b.method, b.seed))
        });
        self.files = collect_files(run_dir)?;
        let text = toml::to_string(&self)
            .map_err(|e| HarnessError::Campaign(format!("manifest serialization: {e}")))?;
        fs::write(run_dir.join("manifest.toml"), text)
            .map_err(|e| HarnessError::Campaign(format!("cannot write manifest: {e}")))?;
        Ok(())
    }
}

fn collect_files(run_dir: &Path) -> Result<Vec<FileEntry>, HarnessError> {
    let mut files = Vec::new();
    let mut stack = vec![run_dir.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = fs::read_dir(&dir)
            .map_err(|e| HarnessError::Campaign(format!("cannot list {}: {e}", dir.display())))?;
        for entry in entries {
            let entry =
                entry.map_err(|e| HarnessError::Campaign(format!("directory walk: {e}")))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.toml") {
                let bytes = fs::read(&path).map_err(|e| {
                    HarnessError::Campaign(format!("cannot read {}: {e}", path.display()))
                })?;
                let digest = Sha256::digest(&bytes);
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                let rel = path
                    .strip_prefix(run_dir)
                    .expect("walked paths live under the run dir")
                    .to_string_lossy()
                    .into_owned();
                files.push(FileEntry {
                    path: rel,
                    sha256: hex,
                });
            }
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}
