//! Experiment grid orchestration: dataset generation, the feature cache,
//! similarity reports, classification and the consolidated summary.
//!
//! Every stage reads and writes under one output directory whose layout is
//! described by [`Layout`].

mod config;
mod experiment;
mod manifest;
mod report;
mod store;

pub use config::ExperimentConfig;
pub use experiment::{
    classify_feature_set, extract_features, generate_dataset, load_series, require_dataset, run_classification,
    run_similarity, similarity_csv_bytes, write_config, AccuracyRow, ClassificationOutcome, StageSummary,
};
pub use manifest::RunManifest;
pub use report::{build_summary, report, MatrixSection, Summary};
pub use store::{
    feature_csv_bytes, file_sha256, read_feature_series, read_trajectory, sha256_hex, trajectory_csv_bytes,
    FeatureMetadata, Layout, RunMetadata,
};
