use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::store::{file_sha256, read_json, write_json, Layout};
use crate::error::Result;

/// Inventory of generated trajectory files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub dataset_key: String,
    pub tool_version: String,
    pub prng: String,
    /// Relative path to SHA-256 of the file contents.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config_hash: cfg.config_hash(),
            dataset_key: cfg.dataset_key(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            prng: crate::rng::PRNG_IDENTITY.to_string(),
            files: BTreeMap::new(),
        }
    }

    pub fn load(layout: &Layout) -> Result<Option<Self>> {
        let path = layout.manifest();
        if !path.exists() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }

    pub fn save(&self, layout: &Layout) -> Result<()> {
        write_json(&layout.manifest(), self).map(|_| ())
    }

    /// Whether `path` exists and hashes to the recorded checksum.
    pub fn matches(&self, layout: &Layout, path: &Path) -> bool {
        match self.files.get(&layout.relative(path)) {
            Some(expected) => file_sha256(path).map(|h| &h == expected).unwrap_or(false),
            None => false,
        }
    }

    /// Relative paths whose contents no longer match their checksum.
    pub fn verify(&self, layout: &Layout) -> Vec<String> {
        self.files
            .iter()
            .filter(|(rel, sum)| file_sha256(&layout.root().join(rel.as_str())).map(|h| &h != *sum).unwrap_or(true))
            .map(|(rel, _)| rel.clone())
            .collect()
    }
}
