use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::manifest::RunManifest;
use super::store::{
    feature_csv_bytes, file_sha256, read_feature_series, read_json, read_trajectory, sha256_hex, trajectory_csv_bytes,
    write_file, write_json, FeatureMetadata, Layout, RunMetadata,
};
use crate::error::{Error, Result};
use crate::features::{self, FeatureSeries, FeatureSet, BOUNDS_VERSION};
use crate::rng::{self, domain};
use crate::sim::{simulate, RunId};
use crate::similarity::{pairwise_matrix, Measure, SeriesTable, SimilarityScore};
use crate::som::{self, AccuracyReport, SomModel};

/// Counts of one resumable stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub total: usize,
    pub computed: usize,
    pub reused: usize,
    /// `path: reason` for every unit that failed.
    pub failures: Vec<String>,
}

impl StageSummary {
    /// `Err` listing the failed units, if any.
    pub fn into_result(self) -> Result<Self> {
        if self.failures.is_empty() {
            Ok(self)
        } else {
            Err(Error::Failed { count: self.failures.len(), detail: self.failures.join("; ") })
        }
    }
}

fn name_gaps(gaps: &[String]) -> String {
    const SHOWN: usize = 20;
    let mut s = gaps.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if gaps.len() > SHOWN {
        s.push_str(&format!(" and {} more", gaps.len() - SHOWN));
    }
    s
}

pub fn write_config(cfg: &ExperimentConfig, layout: &Layout) -> Result<()> {
    write_json(&layout.config_copy(), cfg).map(|_| ())
}

/// Manifest entries (relative path, checksum) of one run's two files.
type RunEntries = [(String, String); 2];

fn simulate_run(cfg: &ExperimentConfig, layout: &Layout, run: RunId) -> Result<RunEntries> {
    let trajectory = simulate(run, cfg.base_seed, &cfg.simulation)?;
    let csv = layout.trajectory_csv(run);
    let bytes = trajectory_csv_bytes(&trajectory);
    write_file(&csv, &bytes)?;
    let meta = layout.trajectory_meta(run);
    let meta_bytes = write_json(&meta, &RunMetadata::of(&trajectory, &cfg.simulation.params))?;
    Ok([(layout.relative(&csv), sha256_hex(&bytes)), (layout.relative(&meta), sha256_hex(&meta_bytes))])
}

/// Simulate every run of the grid that is not already on disk with a
/// matching checksum, then rewrite the manifest. Failed runs are listed in
/// the summary; completed ones are kept.
pub fn generate_dataset(cfg: &ExperimentConfig, layout: &Layout) -> Result<StageSummary> {
    cfg.validate()?;
    write_config(cfg, layout)?;
    let mut manifest = match RunManifest::load(layout)? {
        Some(m) if m.dataset_key == cfg.dataset_key() => m,
        _ => RunManifest::new(cfg),
    };
    let runs = cfg.runs();
    let outcomes: Vec<(RunId, Result<Option<RunEntries>>)> = runs
        .par_iter()
        .map(|&run| {
            let fresh = manifest.matches(layout, &layout.trajectory_csv(run))
                && manifest.matches(layout, &layout.trajectory_meta(run));
            if fresh {
                (run, Ok(None))
            } else {
                (run, simulate_run(cfg, layout, run).map(Some))
            }
        })
        .collect();
    let mut summary = StageSummary { total: runs.len(), ..Default::default() };
    for (run, outcome) in outcomes {
        match outcome {
            Ok(None) => summary.reused += 1,
            Ok(Some(entries)) => {
                summary.computed += 1;
                manifest.files.extend(entries);
            }
            Err(e) => {
                log::error!("{}: {e}", layout.relative(&layout.trajectory_csv(run)));
                summary.failures.push(format!("{}: {e}", layout.relative(&layout.trajectory_csv(run))));
                manifest.files.remove(&layout.relative(&layout.trajectory_csv(run)));
                manifest.files.remove(&layout.relative(&layout.trajectory_meta(run)));
            }
        }
    }
    manifest.config_hash = cfg.config_hash();
    manifest.save(layout)?;
    log::info!("dataset: {} simulated, {} reused, {} failed", summary.computed, summary.reused, summary.failures.len());
    Ok(summary)
}

/// The manifest of a complete dataset for `cfg`, or an error naming the
/// runs that are missing.
pub fn require_dataset(cfg: &ExperimentConfig, layout: &Layout) -> Result<RunManifest> {
    let manifest = RunManifest::load(layout)?
        .ok_or_else(|| Error::Missing(format!("no dataset manifest in {}", layout.root().display())))?;
    if manifest.dataset_key != cfg.dataset_key() {
        return Err(Error::Config(
            "the dataset on disk was generated with a different seed or simulation block".into(),
        ));
    }
    let gaps: Vec<String> = cfg
        .runs()
        .into_iter()
        .map(|run| layout.relative(&layout.trajectory_csv(run)))
        .filter(|rel| !manifest.files.contains_key(rel))
        .collect();
    if !gaps.is_empty() {
        return Err(Error::Missing(format!("{} runs absent from the dataset: {}", gaps.len(), name_gaps(&gaps))));
    }
    Ok(manifest)
}

fn cached_series(cfg: &ExperimentConfig, layout: &Layout, run: RunId, set: FeatureSet, source: &str) -> bool {
    let Ok(meta) = read_json::<FeatureMetadata>(&layout.feature_meta(run, set)) else {
        return false;
    };
    meta.feature_key == cfg.feature_key()
        && meta.bounds_version == BOUNDS_VERSION
        && meta.source_sha256 == source
        && file_sha256(&layout.feature_csv(run, set)).is_ok_and(|h| h == meta.series_sha256)
}

fn extract_sets(
    cfg: &ExperimentConfig,
    layout: &Layout,
    run: RunId,
    sets: &[FeatureSet],
    source: &str,
) -> Result<()> {
    let csv = layout.trajectory_csv(run);
    if file_sha256(&csv)? != source {
        return Err(Error::InvalidInput(format!("{} does not match its manifest checksum", layout.relative(&csv))));
    }
    let trajectory = read_trajectory(&csv, &layout.trajectory_meta(run))?;
    for &set in sets {
        let (series, subsample) =
            features::extract_run(&trajectory, set, &cfg.features, cfg.simulation.transient)?;
        let bytes = feature_csv_bytes(&series);
        write_file(&layout.feature_csv(run, set), &bytes)?;
        let meta = FeatureMetadata {
            run,
            feature_set: set,
            bounds_version: BOUNDS_VERSION,
            feature_key: cfg.feature_key(),
            agents: series.agents,
            subsample,
            source_sha256: source.to_string(),
            series_sha256: sha256_hex(&bytes),
        };
        write_json(&layout.feature_meta(run, set), &meta)?;
    }
    Ok(())
}

/// Bring the feature cache up to date for every run and configured feature
/// set. Entries whose key, bounds version or source checksum differ are
/// recomputed.
pub fn extract_features(cfg: &ExperimentConfig, layout: &Layout) -> Result<StageSummary> {
    cfg.validate()?;
    write_config(cfg, layout)?;
    let manifest = require_dataset(cfg, layout)?;
    let runs = cfg.runs();
    let outcomes: Vec<(RunId, usize, Result<()>)> = runs
        .par_iter()
        .map(|&run| {
            let source = &manifest.files[&layout.relative(&layout.trajectory_csv(run))];
            let stale: Vec<FeatureSet> = cfg
                .feature_sets
                .iter()
                .copied()
                .filter(|&set| !cached_series(cfg, layout, run, set, source))
                .collect();
            let result = if stale.is_empty() { Ok(()) } else { extract_sets(cfg, layout, run, &stale, source) };
            (run, stale.len(), result)
        })
        .collect();
    let per_run = cfg.feature_sets.len();
    let mut summary = StageSummary { total: runs.len() * per_run, ..Default::default() };
    for (run, stale, result) in outcomes {
        summary.reused += per_run - stale;
        match result {
            Ok(()) => summary.computed += stale,
            Err(e) => {
                let rel = layout.relative(&layout.trajectory_csv(run));
                log::error!("{rel}: {e}");
                summary.failures.push(format!("{rel}: {e}"));
            }
        }
    }
    log::info!("features: {} computed, {} reused, {} failed", summary.computed, summary.reused, summary.failures.len());
    Ok(summary)
}

/// Read one cached feature series.
pub fn load_series(cfg: &ExperimentConfig, layout: &Layout, run: RunId, set: FeatureSet) -> Result<FeatureSeries> {
    let meta: FeatureMetadata = read_json(&layout.feature_meta(run, set))?;
    if meta.feature_key != cfg.feature_key() {
        return Err(Error::Missing(format!("stale feature cache for {}", layout.relative(&layout.feature_csv(run, set)))));
    }
    read_feature_series(&layout.feature_csv(run, set), &meta)
}

fn prepare(cfg: &ExperimentConfig, layout: &Layout) -> Result<()> {
    extract_features(cfg, layout)?.into_result().map(|_| ())
}

/// `setting,feature_set,measure,behaviour_a,behaviour_b,mean,std,n` rows.
pub fn similarity_csv_bytes(scores: &[SimilarityScore]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in scores {
        w.serialize(s).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Score every behaviour pair for every (setting, feature set, measure) and
/// write one CSV per combination. Returns the written paths.
pub fn run_similarity(cfg: &ExperimentConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    prepare(cfg, layout)?;
    let mut written = Vec::new();
    for &setting in &cfg.settings {
        for &set in &cfg.feature_sets {
            let keys: Vec<RunId> = cfg.runs().into_iter().filter(|r| r.setting == setting).collect();
            let loaded = keys
                .par_iter()
                .map(|&run| Ok(((run.behaviour, run.replicate), load_series(cfg, layout, run, set)?)))
                .collect::<Result<Vec<_>>>()?;
            let table: SeriesTable = loaded.into_iter().collect();
            for measure in Measure::ALL {
                let scores = pairwise_matrix(&table, &cfg.behaviours, cfg.replicates, measure, &cfg.measures)?;
                let path = layout.similarity_report(setting, set, measure);
                write_file(&path, &similarity_csv_bytes(&scores))?;
                written.push(path);
            }
            log::info!("similarity: {setting} {set} done");
        }
    }
    Ok(written)
}

/// Trained models and scores of one feature set.
#[derive(Debug, Clone)]
pub struct ClassificationOutcome {
    pub feature_set: FeatureSet,
    pub train_runs: Vec<RunId>,
    pub test_runs: Vec<RunId>,
    pub models: Vec<SomModel>,
    pub report: AccuracyReport,
}

/// Split `runs`, cut samples from the series `load` returns, train the
/// configured number of models and score them.
pub fn classify_feature_set<F>(
    cfg: &ExperimentConfig,
    set: FeatureSet,
    runs: &[RunId],
    load: F,
) -> Result<ClassificationOutcome>
where
    F: Fn(RunId) -> Result<FeatureSeries> + Sync,
{
    cfg.som.validate()?;
    let split_seed = rng::mix_seed(cfg.base_seed, &[domain::SPLIT, set.ordinal()]);
    let (train_runs, test_runs) = som::split_runs(runs, cfg.som.train_fraction, split_seed);
    let samples_of = |runs: &[RunId]| -> Result<Vec<som::Sample>> {
        let per_run = runs
            .par_iter()
            .map(|&run| Ok(som::build_samples(&[load(run)?], cfg.som.sample_window)))
            .collect::<Result<Vec<_>>>()?;
        Ok(per_run.into_iter().flatten().collect())
    };
    let train = samples_of(&train_runs)?;
    let test = samples_of(&test_runs)?;
    let models = (0..cfg.som.models)
        .into_par_iter()
        .map(|m| {
            let seed = rng::mix_seed(cfg.base_seed, &[domain::SOM, set.ordinal(), m as u64]);
            som::train_model(&train, &cfg.som, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = som::evaluate(&models, &train, &test)?;
    Ok(ClassificationOutcome { feature_set: set, train_runs, test_runs, models, report })
}

/// One row of the accuracy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub feature_set: FeatureSet,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
    pub models: usize,
}

impl AccuracyRow {
    pub fn of(outcome: &ClassificationOutcome) -> Self {
        let r = &outcome.report;
        Self {
            feature_set: outcome.feature_set,
            train_mean: r.train_mean,
            train_std: r.train_std,
            test_mean: r.test_mean,
            test_std: r.test_std,
            models: r.test.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct AccuracyDetail<'a> {
    report: &'a AccuracyReport,
    train_runs: &'a [RunId],
    test_runs: &'a [RunId],
}

/// Train and evaluate models for every feature set on all settings pooled,
/// and write models, maps and the accuracy table.
pub fn run_classification(cfg: &ExperimentConfig, layout: &Layout) -> Result<Vec<AccuracyRow>> {
    cfg.validate()?;
    prepare(cfg, layout)?;
    let runs = cfg.runs();
    let mut rows = Vec::new();
    let mut details = BTreeMap::new();
    for &set in &cfg.feature_sets {
        let outcome = classify_feature_set(cfg, set, &runs, |run| load_series(cfg, layout, run, set))?;
        for (m, model) in outcome.models.iter().enumerate() {
            let stem = layout.model_stem(set, m);
            som::write_model(&stem, model, &cfg.som)?;
            som::write_u_matrix(&stem.with_file_name(format!("model_{m}_umatrix")), &model.u_matrix())?;
            som::write_label_map(&stem.with_file_name(format!("model_{m}_labels")), model)?;
        }
        log::info!(
            "classification: {set} train {:.3} test {:.3}",
            outcome.report.train_mean,
            outcome.report.test_mean
        );
        rows.push(AccuracyRow::of(&outcome));
        details.insert(
            set.name(),
            serde_json::to_value(AccuracyDetail {
                report: &outcome.report,
                train_runs: &outcome.train_runs,
                test_runs: &outcome.test_runs,
            })
            .expect("report serialises"),
        );
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).expect("in-memory write");
    }
    write_file(&layout.accuracy_table(), &w.into_inner().expect("in-memory flush"))?;
    write_json(&layout.accuracy_table().with_extension("json"), &details)?;
    Ok(rows)
}
