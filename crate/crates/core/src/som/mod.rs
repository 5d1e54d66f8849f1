//! Self-organising map classifier over short windows of feature vectors.
//!
//! A rectangular lattice of prototypes is trained online with a Gaussian
//! neighbourhood, nodes are labelled by majority vote of the training
//! samples they win, and a sample is classified with the label of its best
//! matching unit.

mod io;
mod map;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{read_model, write_label_map, write_model, write_u_matrix, ModelHeader};
pub use map::{SomModel, UMatrix};

use crate::error::{Error, Result};
use crate::features::FeatureSeries;
use crate::rng::{self, domain};
use crate::sim::{Behaviour, RunId, Setting};
use crate::similarity::mean_std;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SomConfig {
    pub rows: usize,
    pub cols: usize,
    /// Online update steps.
    pub steps: usize,
    pub learning_rate: f64,
    /// Initial neighbourhood width in lattice units; `None` means half the
    /// longer lattice side.
    pub sigma0: Option<f64>,
    /// Steps per sample.
    pub sample_window: usize,
    /// Fraction of runs per (setting, behaviour) used for training.
    pub train_fraction: f64,
    /// Independently initialised and trained models.
    pub models: usize,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            rows: 46,
            cols: 46,
            steps: 180_000,
            learning_rate: 0.1,
            sigma0: None,
            sample_window: 5,
            train_fraction: 0.8,
            models: 3,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("SOM lattice must have at least one node".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("learning_rate must lie in (0, 1], got {}", self.learning_rate)));
        }
        if let Some(s) = self.sigma0 {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("sigma0 must be non-negative, got {s}")));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction)));
        }
        if self.sample_window == 0 || self.models == 0 {
            return Err(Error::Config("sample_window and models must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_sigma(&self) -> f64 {
        self.sigma0.unwrap_or(self.rows.max(self.cols) as f64 / 2.0)
    }
}

/// A flattened window of consecutive feature vectors with its class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub vector: Vec<f64>,
    /// Class label in `1..=6`.
    pub label: u8,
    pub run: RunId,
    pub start_step: usize,
}

/// Cut every series into non-overlapping windows of `window` steps. Series
/// shorter than one window are skipped with a warning.
pub fn build_samples(series: &[FeatureSeries], window: usize) -> Vec<Sample> {
    let mut out = Vec::new();
    for s in series {
        if window == 0 || s.len() < window {
            log::warn!("skipping {:?}: {} steps is shorter than the {window}-step window", s.run, s.len());
            continue;
        }
        for (k, chunk) in s.rows.chunks_exact(window).enumerate() {
            out.push(Sample {
                vector: chunk.concat(),
                label: s.run.behaviour.class_label(),
                run: s.run,
                start_step: s.steps[k * window],
            });
        }
    }
    out
}

/// Split runs into train and test sets at the trajectory level, stratified
/// by (setting, behaviour). Each stratum keeps `round(fraction · n)` runs
/// for training, at least one and, when it has two or more runs, leaving
/// at least one for testing.
pub fn split_runs(runs: &[RunId], fraction: f64, seed: u64) -> (Vec<RunId>, Vec<RunId>) {
    let mut strata: BTreeMap<(Setting, Behaviour), Vec<RunId>> = BTreeMap::new();
    for &r in runs {
        strata.entry((r.setting, r.behaviour)).or_default().push(r);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for ((setting, behaviour), mut group) in strata {
        group.sort();
        group.dedup();
        let mut rng = rng::stream(rng::mix_seed(seed, &[domain::SPLIT, setting.ordinal(), behaviour.ordinal()]));
        group.shuffle(&mut rng);
        let n = group.len();
        let k = ((fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        let (a, b) = group.split_at(k);
        train.extend_from_slice(a);
        test.extend_from_slice(b);
    }
    train.sort();
    test.sort();
    (train, test)
}

/// Initialise, train and label one model.
pub fn train_model(train: &[Sample], cfg: &SomConfig, seed: u64) -> Result<SomModel> {
    cfg.validate()?;
    let vectors: Vec<&[f64]> = train.iter().map(|s| s.vector.as_slice()).collect();
    let mut model = SomModel::init(cfg.rows, cfg.cols, &vectors, seed)?;
    model.train(&vectors, cfg.steps, cfg.learning_rate, cfg.initial_sigma())?;
    model.label_nodes(train)?;
    Ok(model)
}

/// Fraction of samples whose predicted class matches their label.
pub fn accuracy(model: &SomModel, samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot score an empty sample set".into()));
    }
    let hits = samples
        .par_iter()
        .map(|s| Ok(usize::from(model.classify(&s.vector)? == s.label)))
        .collect::<Result<Vec<usize>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / samples.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub train: Vec<f64>,
    pub test: Vec<f64>,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
}

pub fn evaluate(models: &[SomModel], train: &[Sample], test: &[Sample]) -> Result<AccuracyReport> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no models to evaluate".into()));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidInput("train and test splits must both be non-empty".into()));
    }
    let train_acc = models.iter().map(|m| accuracy(m, train)).collect::<Result<Vec<_>>>()?;
    let test_acc = models.iter().map(|m| accuracy(m, test)).collect::<Result<Vec<_>>>()?;
    let (train_mean, train_std) = mean_std(&train_acc);
    let (test_mean, test_std) = mean_std(&test_acc);
    Ok(AccuracyReport { train: train_acc, test: test_acc, train_mean, train_std, test_mean, test_std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSet;

    fn series_of(len: usize, behaviour: Behaviour) -> FeatureSeries {
        FeatureSeries {
            run: RunId::new(behaviour, Setting::Bounded40, 0),
            feature_set: FeatureSet::Alharthi2022,
            agents: 40,
            steps: (250..250 + len).collect(),
            rows: (0..len).map(|i| vec![i as f64; 8]).collect(),
        }
    }

    #[test]
    fn samples_are_non_overlapping_windows() {
        let samples = build_samples(&[series_of(1000, Behaviour::Vicsek)], 5);
        assert_eq!(samples.len(), 200);
        assert_eq!(samples[0].vector.len(), 40);
        assert_eq!(samples[0].label, 2);
        assert_eq!(samples[1].start_step, 255);
        assert_eq!(samples[1].vector[..8], [5.0; 8]);
        assert_eq!(samples[1].vector[32..], [9.0; 8]);
    }

    #[test]
    fn short_series_are_skipped() {
        let samples = build_samples(&[series_of(4, Behaviour::Vicsek), series_of(7, Behaviour::Brownian)], 5);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].label, 6);
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let runs: Vec<RunId> = Setting::ALL
            .into_iter()
            .flat_map(|s| Behaviour::ALL.into_iter().flat_map(move |b| (0..10).map(move |r| RunId::new(b, s, r))))
            .collect();
        let (train, test) = split_runs(&runs, 0.8, 5);
        assert_eq!(train.len(), 144);
        assert_eq!(test.len(), 36);
        assert!(train.iter().all(|r| !test.contains(r)));
        assert_eq!((train.clone(), test.clone()), split_runs(&runs, 0.8, 5));
        for s in Setting::ALL {
            for b in Behaviour::ALL {
                assert_eq!(test.iter().filter(|r| r.setting == s && r.behaviour == b).count(), 2);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(SomConfig::default().validate().is_ok());
        assert_eq!(SomConfig::default().initial_sigma(), 23.0);
        assert!(SomConfig { train_fraction: 1.0, ..Default::default() }.validate().is_err());
        assert!(SomConfig { rows: 0, ..Default::default() }.validate().is_err());
    }
}
