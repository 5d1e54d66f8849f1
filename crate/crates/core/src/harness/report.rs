use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::AccuracyRow;
use super::store::{read_json, write_file, write_json, Layout};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::sim::{Behaviour, Setting};
use crate::similarity::{Measure, SimilarityScore};

/// One complete similarity matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSection {
    pub setting: Setting,
    pub feature_set: FeatureSet,
    pub measure: Measure,
    pub file: String,
    pub scores: Vec<SimilarityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub behaviours: Vec<Behaviour>,
    pub similarity: Vec<MatrixSection>,
    pub accuracy: Option<Vec<AccuracyRow>>,
    /// Expected reports that are absent or incomplete.
    pub missing: Vec<String>,
}

impl Summary {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "config {}", self.config_hash);
        let width = self.behaviours.iter().map(|b| b.name().len()).max().unwrap_or(0).max(8);
        for section in &self.similarity {
            let _ = writeln!(out, "\nsimilarity {} {} {}", section.setting, section.feature_set, section.measure);
            let _ = write!(out, "{:width$}", "");
            for b in &self.behaviours {
                let _ = write!(out, " {:>width$}", b.name());
            }
            out.push('\n');
            for &a in &self.behaviours {
                let _ = write!(out, "{:width$}", a.name());
                for &b in &self.behaviours {
                    let cell = section
                        .scores
                        .iter()
                        .find(|s| (s.behaviour_a, s.behaviour_b) == (a, b) || (s.behaviour_a, s.behaviour_b) == (b, a))
                        .map(|s| format!("{:.4}", s.mean))
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(out, " {cell:>width$}");
                }
                out.push('\n');
            }
        }
        if let Some(rows) = &self.accuracy {
            let _ = writeln!(out, "\naccuracy");
            let _ = writeln!(out, "{:14} {:>15} {:>15}", "feature_set", "train", "test");
            for r in rows {
                let train = format!("{:.3}±{:.3}", r.train_mean, r.train_std);
                let test = format!("{:.3}±{:.3}", r.test_mean, r.test_std);
                let _ = writeln!(out, "{:14} {train:>15} {test:>15}", r.feature_set.name());
            }
        }
        if !self.missing.is_empty() {
            let _ = writeln!(out, "\nmissing");
            for m in &self.missing {
                let _ = writeln!(out, "  {m}");
            }
        }
        out
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

fn expected_pairs(behaviours: &[Behaviour]) -> Vec<(Behaviour, Behaviour)> {
    behaviours
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| behaviours[i + 1..].iter().map(move |&b| (a, b)))
        .collect()
}

/// Collect every similarity report and the accuracy table found under the
/// layout root into one summary, flagging missing and incomplete reports.
/// Incomplete matrices are listed as missing rather than shown.
pub fn build_summary(layout: &Layout) -> Result<Summary> {
    let config_path = layout.config_copy();
    let has_any = config_path.exists() || layout.similarity_dir().exists() || layout.classification_dir().exists();
    if !has_any {
        return Err(Error::Missing(format!("no experiment artifacts in {}", layout.root().display())));
    }
    let cfg: ExperimentConfig = if config_path.exists() { read_json(&config_path)? } else { ExperimentConfig::default() };
    let pairs = expected_pairs(&cfg.behaviours);
    let mut summary = Summary {
        config_hash: cfg.config_hash(),
        behaviours: cfg.behaviours.clone(),
        similarity: Vec::new(),
        accuracy: None,
        missing: Vec::new(),
    };
    for &setting in &cfg.settings {
        for &set in &cfg.feature_sets {
            for measure in Measure::ALL {
                let path = layout.similarity_report(setting, set, measure);
                let rel = layout.relative(&path);
                if !path.exists() {
                    summary.missing.push(rel);
                    continue;
                }
                let scores: Vec<SimilarityScore> = read_rows(&path)?;
                let present = pairs
                    .iter()
                    .filter(|&&(a, b)| {
                        scores.iter().any(|s| {
                            s.setting == setting
                                && s.feature_set == set
                                && s.measure == measure
                                && (s.behaviour_a, s.behaviour_b) == (a, b)
                                && s.mean.is_finite()
                        })
                    })
                    .count();
                if present < pairs.len() {
                    summary.missing.push(format!("{rel} (incomplete: {present} of {} pairs)", pairs.len()));
                    continue;
                }
                summary.similarity.push(MatrixSection { setting, feature_set: set, measure, file: rel, scores });
            }
        }
    }
    let table = layout.accuracy_table();
    if table.exists() {
        let rows: Vec<AccuracyRow> = read_rows(&table)?;
        for &set in &cfg.feature_sets {
            if !rows.iter().any(|r| r.feature_set == set) {
                summary.missing.push(format!("{} (no row for {set})", layout.relative(&table)));
            }
        }
        summary.accuracy = Some(rows);
    } else {
        summary.missing.push(layout.relative(&table));
    }
    Ok(summary)
}

/// Build the summary and write `summary.json` and `summary.txt`.
pub fn report(layout: &Layout) -> Result<Summary> {
    let summary = build_summary(layout)?;
    write_json(&layout.summary_json(), &summary)?;
    write_file(&layout.summary_text(), summary.to_text().as_bytes())?;
    Ok(summary)
}
