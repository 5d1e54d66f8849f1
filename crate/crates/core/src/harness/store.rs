//! On-disk layout and file formats of the experiment artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{FeatureSeries, FeatureSet};
use crate::sim::{AgentState, ArenaConfig, BehaviourParams, BoundaryMode, RunId, Setting, SwarmState, Trajectory};
use crate::similarity::Measure;

/// Paths of every artifact under one output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn trajectory_csv(&self, run: RunId) -> PathBuf {
        self.root
            .join("data")
            .join(run.setting.name())
            .join(run.behaviour.name())
            .join(format!("run_{}.csv", run.replicate))
    }

    pub fn trajectory_meta(&self, run: RunId) -> PathBuf {
        self.trajectory_csv(run).with_extension("json")
    }

    pub fn feature_csv(&self, run: RunId, set: FeatureSet) -> PathBuf {
        self.root
            .join("features")
            .join(run.setting.name())
            .join(set.name())
            .join(run.behaviour.name())
            .join(format!("run_{}.csv", run.replicate))
    }

    pub fn feature_meta(&self, run: RunId, set: FeatureSet) -> PathBuf {
        self.feature_csv(run, set).with_extension("json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn config_copy(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn similarity_dir(&self) -> PathBuf {
        self.root.join("similarity")
    }

    pub fn similarity_report(&self, setting: Setting, set: FeatureSet, measure: Measure) -> PathBuf {
        self.similarity_dir().join(format!("{setting}_{set}_{measure}.csv"))
    }

    pub fn classification_dir(&self) -> PathBuf {
        self.root.join("classification")
    }

    pub fn accuracy_table(&self) -> PathBuf {
        self.classification_dir().join("accuracy.csv")
    }

    pub fn model_stem(&self, set: FeatureSet, model: usize) -> PathBuf {
        self.classification_dir().join(set.name()).join(format!("model_{model}"))
    }

    pub fn summary_json(&self) -> PathBuf {
        self.root.join("summary.json")
    }

    pub fn summary_text(&self) -> PathBuf {
        self.root.join("summary.txt")
    }

    /// Path relative to the root with `/` separators, as stored in manifests.
    pub fn relative(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    write_file(path, &bytes)?;
    Ok(bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Sidecar of a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub behaviour: crate::sim::Behaviour,
    pub setting: Setting,
    pub replicate: usize,
    pub base_seed: u64,
    pub speed: f64,
    pub side: f64,
    pub boundary: BoundaryMode,
    pub total_steps: usize,
    pub agents: usize,
    pub params: BehaviourParams,
    pub init_seed: u64,
    pub dynamics_seed: u64,
    pub prng: String,
}

impl RunMetadata {
    pub fn of(trajectory: &Trajectory, params: &BehaviourParams) -> Self {
        let run = trajectory.run;
        Self {
            behaviour: run.behaviour,
            setting: run.setting,
            replicate: run.replicate,
            base_seed: trajectory.base_seed,
            speed: trajectory.speed,
            side: trajectory.arena.side(),
            boundary: trajectory.arena.boundary(),
            total_steps: trajectory.states.len(),
            agents: trajectory.agent_count(),
            params: params.clone(),
            init_seed: run.init_seed(trajectory.base_seed),
            dynamics_seed: run.dynamics_seed(trajectory.base_seed),
            prng: crate::rng::PRNG_IDENTITY.to_string(),
        }
    }
}

/// `step,agent,x,y,heading` rows, one per agent per step.
pub fn trajectory_csv_bytes(trajectory: &Trajectory) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "agent", "x", "y", "heading"]).expect("in-memory write");
    for state in &trajectory.states {
        for (i, a) in state.agents.iter().enumerate() {
            w.write_record(&[
                state.step.to_string(),
                i.to_string(),
                a.x.to_string(),
                a.y.to_string(),
                a.heading.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

#[derive(Debug, Deserialize)]
struct TrajectoryRow {
    step: usize,
    agent: usize,
    x: f64,
    y: f64,
    heading: f64,
}

pub fn read_trajectory(csv_path: &Path, meta_path: &Path) -> Result<Trajectory> {
    let meta: RunMetadata = read_json(meta_path)?;
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    let mut states: Vec<SwarmState> = Vec::with_capacity(meta.total_steps);
    for row in reader.deserialize::<TrajectoryRow>() {
        let row = row.map_err(|e| Error::csv(csv_path, e))?;
        if row.agent == 0 {
            if row.step != states.len() {
                return Err(Error::InvalidInput(format!("{}: step {} out of order", csv_path.display(), row.step)));
            }
            states.push(SwarmState { step: row.step, agents: Vec::with_capacity(meta.agents) });
        }
        let state = states
            .last_mut()
            .filter(|s| s.step == row.step && s.agents.len() == row.agent)
            .ok_or_else(|| Error::InvalidInput(format!("{}: malformed row for step {}", csv_path.display(), row.step)))?;
        state.agents.push(AgentState { x: row.x, y: row.y, heading: row.heading });
    }
    if states.len() != meta.total_steps || states.iter().any(|s| s.agents.len() != meta.agents) {
        return Err(Error::InvalidInput(format!("{} is incomplete", csv_path.display())));
    }
    Ok(Trajectory {
        run: RunId::new(meta.behaviour, meta.setting, meta.replicate),
        base_seed: meta.base_seed,
        speed: meta.speed,
        arena: ArenaConfig::new(meta.side, meta.boundary)?,
        states,
    })
}

/// Sidecar of a cached feature CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMetadata {
    pub run: RunId,
    pub feature_set: FeatureSet,
    pub bounds_version: u32,
    pub feature_key: String,
    pub agents: usize,
    pub subsample: Vec<usize>,
    pub source_sha256: String,
    pub series_sha256: String,
}

/// `step,f0,f1,…` rows.
pub fn feature_csv_bytes(series: &FeatureSeries) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string()];
    header.extend((0..series.dim()).map(|i| format!("f{i}")));
    w.write_record(&header).expect("in-memory write");
    for (step, row) in series.steps.iter().zip(&series.rows) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(step.to_string());
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn read_feature_series(csv_path: &Path, meta: &FeatureMetadata) -> Result<FeatureSeries> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    let mut steps = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(csv_path, e))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("{}: bad value `{s}`: {e}", csv_path.display())))
        };
        let step = record
            .get(0)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("{}: bad step column", csv_path.display())))?;
        steps.push(step);
        rows.push(record.iter().skip(1).map(parse).collect::<Result<Vec<f64>>>()?);
    }
    Ok(FeatureSeries { run: meta.run, feature_set: meta.feature_set, agents: meta.agents, steps, rows })
}
