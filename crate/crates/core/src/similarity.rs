//! Behaviour-pair similarity and distance measures over feature series.
//!
//! All four measures compare two runs that share a replicate seed, step by
//! step or window by window, so a behaviour compared with itself always
//! gets the perfect score.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSeries, FeatureSet};
use crate::sim::{Behaviour, Setting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Cosine,
    Euclidean,
    CombinedStateCount,
    SampledAverageState,
}

impl Measure {
    pub const ALL: [Measure; 4] =
        [Measure::Cosine, Measure::Euclidean, Measure::CombinedStateCount, Measure::SampledAverageState];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Cosine => "cosine",
            Measure::Euclidean => "euclidean",
            Measure::CombinedStateCount => "combined_state_count",
            Measure::SampledAverageState => "sampled_average_state",
        }
    }

    /// Score of a series compared with itself.
    pub fn perfect_score(self) -> f64 {
        match self {
            Measure::Cosine => 1.0,
            _ => 0.0,
        }
    }

    pub fn is_similarity(self) -> bool {
        self == Measure::Cosine
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown measure `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    /// Width of the low and high slices when discretising features.
    pub state_threshold: f64,
    /// Steps per window of the sampled average state.
    pub window: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { state_threshold: 1e-2, window: 10 }
    }
}

impl MeasureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.state_threshold > 0.0 && self.state_threshold < 0.5) {
            return Err(Error::Config(format!("state_threshold must lie in (0, 0.5), got {}", self.state_threshold)));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_aligned(a: &FeatureSeries, b: &FeatureSeries) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("series lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        if ra.len() != rb.len() {
            return Err(Error::DimensionMismatch { expected: ra.len(), actual: rb.len() });
        }
    }
    Ok(())
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cosine_step(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        // both zero is covered by the equality above
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Per-step cosine similarity averaged over steps.
pub fn cosine(a: &FeatureSeries, b: &FeatureSeries) -> Result<f64> {
    check_aligned(a, b)?;
    Ok(mean(a.rows.iter().zip(&b.rows).map(|(x, y)| cosine_step(x, y))))
}

/// Per-step Euclidean distance averaged over steps.
pub fn euclidean(a: &FeatureSeries, b: &FeatureSeries) -> Result<f64> {
    check_aligned(a, b)?;
    Ok(mean(a.rows.iter().zip(&b.rows).map(|(x, y)| euclid(x, y))))
}

/// Discretised feature level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub fn of(value: f64, threshold: f64) -> Level {
        if value < threshold {
            Level::Low
        } else if value > 1.0 - threshold {
            Level::High
        } else {
            Level::Medium
        }
    }
}

/// Occurrence count of each discrete state.
pub type StateCountMap = BTreeMap<Vec<Level>, usize>;

/// Count discrete states: one per step for swarm-level sets, one per agent
/// per step for agent-level sets.
pub fn state_counts(series: &FeatureSeries, threshold: f64) -> Result<StateCountMap> {
    let width = series.feature_set.agent_width();
    let mut map = StateCountMap::new();
    for (step, row) in series.rows.iter().enumerate() {
        if let Some((index, &value)) = row.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Unnormalized { step, index, value });
        }
        let chunk = width.unwrap_or(row.len()).max(1);
        for block in row.chunks(chunk) {
            let state: Vec<Level> = block.iter().map(|&v| Level::of(v, threshold)).collect();
            *map.entry(state).or_insert(0) += 1;
        }
    }
    Ok(map)
}

/// `Σ_s |c_A(s) − c_B(s)| / (Σ_s c_A(s) + Σ_s c_B(s))`: 0 for identical
/// maps, 1 for maps with no state in common.
pub fn count_map_distance(a: &StateCountMap, b: &StateCountMap) -> f64 {
    let total: usize = a.values().sum::<usize>() + b.values().sum::<usize>();
    if total == 0 {
        return 0.0;
    }
    let mut diff = 0usize;
    for (state, &ca) in a {
        diff += ca.abs_diff(b.get(state).copied().unwrap_or(0));
    }
    for (state, &cb) in b {
        if !a.contains_key(state) {
            diff += cb;
        }
    }
    diff as f64 / total as f64
}

pub fn combined_state_count(a: &FeatureSeries, b: &FeatureSeries, threshold: f64) -> Result<f64> {
    check_aligned(a, b)?;
    Ok(count_map_distance(&state_counts(a, threshold)?, &state_counts(b, threshold)?))
}

/// Swarm-average feature vector per step: agent-level rows collapse to the
/// mean agent block.
fn swarm_average(series: &FeatureSeries) -> Vec<Vec<f64>> {
    match series.feature_set.agent_width() {
        None => series.rows.clone(),
        Some(width) => series
            .rows
            .iter()
            .map(|row| {
                let agents = row.len() / width;
                let mut avg = vec![0.0; width];
                for block in row.chunks(width) {
                    for (acc, v) in avg.iter_mut().zip(block) {
                        *acc += v;
                    }
                }
                avg.iter_mut().for_each(|v| *v /= agents as f64);
                avg
            })
            .collect(),
    }
}

fn window_means(rows: &[Vec<f64>], window: usize) -> Vec<Vec<f64>> {
    rows.chunks_exact(window)
        .map(|chunk| {
            let mut m = vec![0.0; chunk[0].len()];
            for row in chunk {
                for (acc, v) in m.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            m.iter_mut().for_each(|v| *v /= window as f64);
            m
        })
        .collect()
}

/// Mean Euclidean distance between window-averaged swarm-average vectors.
/// A trailing partial window is dropped.
pub fn sampled_average_state(a: &FeatureSeries, b: &FeatureSeries, window: usize) -> Result<f64> {
    check_aligned(a, b)?;
    if window == 0 || a.len() < window {
        return Err(Error::InvalidInput(format!("need at least {window} steps for the window, got {}", a.len())));
    }
    let wa = window_means(&swarm_average(a), window);
    let wb = window_means(&swarm_average(b), window);
    Ok(mean(wa.iter().zip(&wb).map(|(x, y)| euclid(x, y))))
}

pub fn score(measure: Measure, a: &FeatureSeries, b: &FeatureSeries, cfg: &MeasureConfig) -> Result<f64> {
    match measure {
        Measure::Cosine => cosine(a, b),
        Measure::Euclidean => euclidean(a, b),
        Measure::CombinedStateCount => combined_state_count(a, b, cfg.state_threshold),
        Measure::SampledAverageState => sampled_average_state(a, b, cfg.window),
    }
}

/// Mean and spread of one measure for one behaviour pair over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub setting: Setting,
    pub feature_set: FeatureSet,
    pub measure: Measure,
    pub behaviour_a: Behaviour,
    pub behaviour_b: Behaviour,
    pub mean: f64,
    /// Sample standard deviation (zero for a single replicate).
    pub std: f64,
    pub n: usize,
}

/// Sample mean and standard deviation, summed in input order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (m, var.sqrt())
}

/// Feature series of one setting and feature set, keyed by
/// `(behaviour, replicate)`.
pub type SeriesTable = HashMap<(Behaviour, usize), FeatureSeries>;

fn lookup(table: &SeriesTable, behaviour: Behaviour, replicate: usize) -> Result<&FeatureSeries> {
    table
        .get(&(behaviour, replicate))
        .ok_or_else(|| Error::Missing(format!("no feature series for {behaviour} replicate {replicate}")))
}

/// Score one behaviour pair over `replicates` seeds, comparing the two runs
/// that share each seed.
pub fn score_pair(
    table: &SeriesTable,
    a: Behaviour,
    b: Behaviour,
    replicates: usize,
    measure: Measure,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore> {
    let first = lookup(table, a, 0)?;
    let values = (0..replicates)
        .into_par_iter()
        .map(|r| score(measure, lookup(table, a, r)?, lookup(table, b, r)?, cfg))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std) = mean_std(&values);
    Ok(SimilarityScore {
        setting: first.run.setting,
        feature_set: first.feature_set,
        measure,
        behaviour_a: a,
        behaviour_b: b,
        mean,
        std,
        n: replicates,
    })
}

/// All unordered pairs of distinct behaviours, in `behaviours` order.
pub fn pairwise_matrix(
    table: &SeriesTable,
    behaviours: &[Behaviour],
    replicates: usize,
    measure: Measure,
    cfg: &MeasureConfig,
) -> Result<Vec<SimilarityScore>> {
    let mut missing = Vec::new();
    for &b in behaviours {
        for r in 0..replicates {
            if !table.contains_key(&(b, r)) {
                missing.push(format!("{b}/run_{r}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Missing(format!("feature series missing for {}", missing.join(", "))));
    }
    let pairs: Vec<(Behaviour, Behaviour)> = behaviours
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| behaviours[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    pairs
        .into_iter()
        .map(|(a, b)| score_pair(table, a, b, replicates, measure, cfg))
        .collect()
}
