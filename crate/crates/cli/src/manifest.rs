//! Run manifests: a JSON sidecar listing every output with its digest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: String,
    pub scenario_source: String,
    pub config_sha256: String,
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub timestamp: String,
    pub outputs: Vec<OutputEntry>,
    /// Free-form results worth keeping next to the data.
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, scenario: &str, source: &str, config_sha256: String, input: &[u8]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario: scenario.to_string(),
            scenario_source: source.to_string(),
            config_sha256,
            input_sha256: sha256_hex(input),
            seed: None,
            threads: None,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Writes `bytes` to `dir/name` and records it.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// Re-hashes every listed output. Returns the manifest on success.
pub fn verify_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for out in &manifest.outputs {
        let bytes = std::fs::read(dir.join(&out.path)).with_context(|| format!("reading {}", out.path))?;
        if sha256_hex(&bytes) != out.sha256 {
            bail!("{} does not match its recorded digest", out.path);
        }
    }
    Ok(manifest)
}
