//! Run manifests: written before outputs, finalized after. A manifest
//! plus one build pins every output byte; the run identifier is a hash of
//! the experiment name, the canonicalized configuration, and the seed, so
//! re-runs share it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub run_id: String,
    /// Effective primary seed of the run.
    pub seed: u64,
    /// Set when the seed came from the command line rather than the
    /// config; replayed verbatim by `rerun`.
    #[serde(default)]
    pub seed_override: Option<u64>,
    pub code_version: String,
    pub started: String,
    pub finished: Option<String>,
    pub status: String,
    pub outputs: Vec<String>,
    pub config: toml::Value,
}

impl RunManifest {
    pub fn begin(
        experiment: &str,
        config: &impl Serialize,
        seed: u64,
        seed_override: Option<u64>,
    ) -> Result<Self, CliError> {
        let config_value = toml::Value::try_from(config)
            .map_err(|e| CliError::usage(format!("config not serializable: {e}")))?;
        let canonical = toml::to_string(&config_value)
            .map_err(|e| CliError::usage(format!("config not serializable: {e}")))?;
        let mut hasher = Sha256::new();
        hasher.update(experiment.as_bytes());
        hasher.update(canonical.as_bytes());
        hasher.update(seed.to_le_bytes());
        let digest = hasher.finalize();
        let run_id = hex_prefix(&digest, 12);
        Ok(RunManifest {
            experiment: experiment.to_string(),
            run_id,
            seed,
            seed_override,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started: chrono::Utc::now().to_rfc3339(),
            finished: None,
            status: "running".to_string(),
            outputs: Vec::new(),
            config: config_value,
        })
    }

    pub fn path(out_dir: &Path) -> PathBuf {
        out_dir.join("manifest.json")
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::internal(format!("manifest serialization: {e}")))?;
        std::fs::write(Self::path(out_dir), text)
            .map_err(|e| CliError::internal(format!("writing manifest: {e}")))?;
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.outputs.push(name.to_string_lossy().into_owned());
        }
    }

    pub fn finalize(&mut self, out_dir: &Path, status: &str) -> Result<(), CliError> {
        self.finished = Some(chrono::Utc::now().to_rfc3339());
        self.status = status.to_string();
        self.write(out_dir)
    }
}

fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

/// SHA-256 of a file, for determinism audits.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::internal(format!("reading {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex_prefix(&hasher.finalize(), 64))
}
