//! Artifact writing with a per-stage manifest: every output file is listed
//! with its sha256 digest and row count, so identical inputs are provably
//! reproduced by digest comparison.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::stages::StageError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub artifact: String,
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    /// Data rows for tabular artifacts, 0 for free-form ones.
    pub rows: u64,
}

/// Collects written artifacts for one stage and finalises the manifest.
pub struct StageOutputs {
    out_dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl StageOutputs {
    pub fn new(out_dir: &Path) -> Result<Self, StageError> {
        std::fs::create_dir_all(out_dir).map_err(|e| {
            StageError::Structural(format!(
                "cannot create output directory {}: {e}",
                out_dir.display()
            ))
        })?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn write_bytes(
        &mut self,
        artifact: &str,
        filename: &str,
        bytes: &[u8],
        rows: u64,
    ) -> Result<(), StageError> {
        let path = self.out_dir.join(filename);
        std::fs::write(&path, bytes)
            .map_err(|e| StageError::Structural(format!("cannot write {}: {e}", path.display())))?;
        self.entries.push(ManifestEntry {
            artifact: artifact.to_string(),
            path: filename.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            rows,
        });
        Ok(())
    }

    /// Write a CSV artifact; rows = line count minus the header.
    pub fn write_csv(
        &mut self,
        artifact: &str,
        filename: &str,
        content: &str,
    ) -> Result<(), StageError> {
        let rows = content.lines().count().saturating_sub(1) as u64;
        self.write_bytes(artifact, filename, content.as_bytes(), rows)
    }

    /// Write a free-form text artifact (SVG, DOT, GraphML).
    pub fn write_text(
        &mut self,
        artifact: &str,
        filename: &str,
        content: &str,
    ) -> Result<(), StageError> {
        self.write_bytes(artifact, filename, content.as_bytes(), 0)
    }

    /// Write a JSON artifact with stable field order.
    pub fn write_json<T: Serialize>(
        &mut self,
        artifact: &str,
        filename: &str,
        value: &T,
    ) -> Result<(), StageError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| StageError::Structural(format!("cannot serialise {artifact}: {e}")))?;
        text.push('\n');
        self.write_bytes(artifact, filename, text.as_bytes(), 0)
    }

    /// Write manifest-<stage>.json listing everything this stage produced.
    pub fn finish(mut self, stage: &str) -> Result<PathBuf, StageError> {
        self.entries.sort_by(|a, b| a.artifact.cmp(&b.artifact));
        let mut text = serde_json::to_string_pretty(&self.entries)
            .map_err(|e| StageError::Structural(format!("cannot serialise manifest: {e}")))?;
        text.push('\n');
        let path = self.out_dir.join(format!("manifest-{stage}.json"));
        std::fs::write(&path, text.as_bytes())
            .map_err(|e| StageError::Structural(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Load a manifest back, for digest comparison in tests and tooling.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, StageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| StageError::Structural(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| StageError::Structural(format!("invalid manifest {}: {e}", path.display())))
}
