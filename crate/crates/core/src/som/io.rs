use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::map::{SomModel, UMatrix};
use super::SomConfig;
use crate::error::{Error, Result};

/// JSON header stored next to the raw prototype matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub seed: u64,
    pub steps: usize,
    pub learning_rate: f64,
    pub sigma0: f64,
    pub decay: String,
    pub neighbourhood: String,
    /// Relative path of the prototype matrix.
    pub prototypes: String,
    pub encoding: String,
    pub labels: Option<Vec<u8>>,
    pub hits: Vec<usize>,
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<stem>.json` and `<stem>.bin` (little-endian f64, row-major
/// nodes, then dimensions). Returns both paths.
pub fn write_model(stem: &Path, model: &SomModel, cfg: &SomConfig) -> Result<Vec<PathBuf>> {
    let bin = with_ext(stem, ".bin");
    let json = with_ext(stem, ".json");
    let bytes: Vec<u8> = model.prototypes().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_bytes(&bin, &bytes)?;
    let header = ModelHeader {
        rows: model.rows(),
        cols: model.cols(),
        dim: model.dim(),
        seed: model.seed(),
        steps: cfg.steps,
        learning_rate: cfg.learning_rate,
        sigma0: cfg.initial_sigma(),
        decay: "x0 / (1 + 2 t / T)".into(),
        neighbourhood: "gaussian".into(),
        prototypes: bin.file_name().expect("file name").to_string_lossy().into_owned(),
        encoding: "f64-le, row-major".into(),
        labels: model.labels().map(<[u8]>::to_vec),
        hits: model.hits().to_vec(),
    };
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::json(&json, e))?;
    write_bytes(&json, text.as_bytes())?;
    Ok(vec![json, bin])
}

pub fn read_model(header_path: &Path) -> Result<(ModelHeader, SomModel)> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: ModelHeader = serde_json::from_str(&text).map_err(|e| Error::json(header_path, e))?;
    let bin = header_path.with_file_name(&header.prototypes);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput(format!("{} is not a whole number of f64 values", bin.display())));
    }
    let prototypes = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let mut model = SomModel::from_prototypes(header.rows, header.cols, header.dim, prototypes, header.seed)?;
    if let Some(labels) = &header.labels {
        if labels.len() != model.node_count() || header.hits.len() != model.node_count() {
            return Err(Error::InvalidInput("label or hit table does not match the lattice".into()));
        }
        model.set_labels(labels.clone(), header.hits.clone());
    }
    Ok((header, model))
}

fn grid_csv(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("row,col,value\n");
    for r in 0..rows {
        for c in 0..cols {
            out.push_str(&format!("{r},{c},{}\n", cell(r, c)));
        }
    }
    out
}

fn pgm(rows: usize, cols: usize, pixels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = Vec::new();
    write!(out, "P5\n{cols} {rows}\n255\n").expect("in-memory write");
    out.extend(pixels);
    out
}

/// `<stem>.csv` and an 8-bit `<stem>.pgm`, min-max scaled.
pub fn write_u_matrix(stem: &Path, u: &UMatrix) -> Result<Vec<PathBuf>> {
    let csv = with_ext(stem, ".csv");
    let img = with_ext(stem, ".pgm");
    write_bytes(&csv, grid_csv(u.rows, u.cols, |r, c| u.get(r, c).to_string()).as_bytes())?;
    let lo = u.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = |v: f64| if hi > lo { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 0 };
    write_bytes(&img, &pgm(u.rows, u.cols, u.values.iter().map(|&v| scale(v))))?;
    Ok(vec![csv, img])
}

/// `<stem>.csv` and an 8-bit `<stem>.pgm` with grey level `label × 36`.
pub fn write_label_map(stem: &Path, model: &SomModel) -> Result<Vec<PathBuf>> {
    let labels = model.labels().ok_or(Error::Unlabelled)?;
    let csv = with_ext(stem, ".csv");
    let img = with_ext(stem, ".pgm");
    let cols = model.cols();
    write_bytes(&csv, grid_csv(model.rows(), cols, |r, c| labels[r * cols + c].to_string()).as_bytes())?;
    write_bytes(&img, &pgm(model.rows(), cols, labels.iter().map(|&l| l.saturating_mul(36))))?;
    Ok(vec![csv, img])
}
