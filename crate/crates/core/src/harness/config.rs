use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureSet};
use crate::sim::{Behaviour, RunId, Setting, SimConfig};
use crate::similarity::MeasureConfig;
use crate::som::SomConfig;

/// Declarative description of the whole experiment grid. Every field has a
/// default, so `{}` is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_seed: u64,
    pub settings: Vec<Setting>,
    pub behaviours: Vec<Behaviour>,
    pub feature_sets: Vec<FeatureSet>,
    pub replicates: usize,
    pub simulation: SimConfig,
    pub features: FeatureConfig,
    pub measures: MeasureConfig,
    pub som: SomConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            base_seed: 1,
            settings: Setting::ALL.to_vec(),
            behaviours: Behaviour::ALL.to_vec(),
            feature_sets: FeatureSet::ALL.to_vec(),
            replicates: 50,
            simulation: SimConfig::default(),
            features: FeatureConfig::default(),
            measures: MeasureConfig::default(),
            som: SomConfig::default(),
        }
    }
}

fn check_unique<T: PartialEq + std::fmt::Debug>(name: &str, items: &[T]) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    for (i, a) in items.iter().enumerate() {
        if items[i + 1..].contains(a) {
            return Err(Error::Config(format!("{name} lists {a:?} twice")));
        }
    }
    Ok(())
}

fn digest(value: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(value).expect("config serialises");
    hex::encode(Sha256::digest(&bytes))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        check_unique("settings", &self.settings)?;
        check_unique("behaviours", &self.behaviours)?;
        check_unique("feature_sets", &self.feature_sets)?;
        self.simulation.validate()?;
        self.features.validate()?;
        self.measures.validate()?;
        self.som.validate()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Hash of the whole configuration.
    pub fn config_hash(&self) -> String {
        digest(self)
    }

    /// Hash of the fields that determine trajectory files.
    pub fn dataset_key(&self) -> String {
        digest(&(self.base_seed, &self.simulation))
    }

    /// Hash of the fields that determine feature files.
    pub fn feature_key(&self) -> String {
        digest(&(self.dataset_key(), &self.features, crate::features::BOUNDS_VERSION))
    }

    /// Every run of the grid, ordered by setting, behaviour, replicate.
    pub fn runs(&self) -> Vec<RunId> {
        let mut out = Vec::with_capacity(self.settings.len() * self.behaviours.len() * self.replicates);
        for &s in &self.settings {
            for &b in &self.behaviours {
                for r in 0..self.replicates {
                    out.push(RunId::new(b, s, r));
                }
            }
        }
        out
    }

    /// Post-transient steps per run.
    pub fn usable_steps(&self) -> usize {
        self.simulation.total_steps - self.simulation.transient
    }
}
