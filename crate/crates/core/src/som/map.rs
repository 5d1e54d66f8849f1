use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{Error, Result};
use crate::rng::{self, domain};

/// Rectangular lattice of prototypes, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    rows: usize,
    cols: usize,
    dim: usize,
    seed: u64,
    prototypes: Vec<f64>,
    labels: Option<Vec<u8>>,
    hits: Vec<usize>,
}

impl SomModel {
    /// Prototypes drawn uniformly inside the per-dimension range of `data`.
    pub fn init(rows: usize, cols: usize, data: &[&[f64]], seed: u64) -> Result<Self> {
        let first = data.first().ok_or_else(|| Error::InvalidInput("no training data".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidInput("training vectors are empty".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Config("SOM lattice must have at least one node".into()));
        }
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for v in data {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
            }
            for (k, &x) in v.iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        let mut rng = rng::stream(rng::mix_seed(seed, &[domain::SOM, 0]));
        let prototypes = (0..rows * cols)
            .flat_map(|_| (0..dim).map(|k| lo[k] + (hi[k] - lo[k]) * rng.random::<f64>()).collect::<Vec<_>>())
            .collect();
        Ok(Self { rows, cols, dim, seed, prototypes, labels: None, hits: vec![0; rows * cols] })
    }

    /// Build a map from explicit prototypes, row-major.
    pub fn from_prototypes(rows: usize, cols: usize, dim: usize, prototypes: Vec<f64>, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::Config("SOM lattice and prototypes must be non-empty".into()));
        }
        if prototypes.len() != rows * cols * dim {
            return Err(Error::DimensionMismatch { expected: rows * cols * dim, actual: prototypes.len() });
        }
        Ok(Self { rows, cols, dim, seed, prototypes, labels: None, hits: vec![0; rows * cols] })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn prototypes(&self) -> &[f64] {
        &self.prototypes
    }

    pub fn prototype(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.cols + col) * self.dim;
        &self.prototypes[start..start + self.dim]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn label(&self, row: usize, col: usize) -> Option<u8> {
        self.labels.as_ref().map(|l| l[row * self.cols + col])
    }

    /// Training samples won by each node during labelling.
    pub fn hits(&self) -> &[usize] {
        &self.hits
    }

    pub(crate) fn set_labels(&mut self, labels: Vec<u8>, hits: Vec<usize>) {
        self.labels = Some(labels);
        self.hits = hits;
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(())
    }

    fn bmu_index(&self, x: &[f64]) -> usize {
        let mut best = f64::INFINITY;
        let mut best_idx = 0;
        for (idx, w) in self.prototypes.chunks_exact(self.dim).enumerate() {
            // Partial sums only grow, so stop once this node cannot win.
            let mut d = 0.0;
            for (a, b) in w.iter().zip(x) {
                d += (a - b) * (a - b);
                if d >= best {
                    break;
                }
            }
            if d < best {
                best = d;
                best_idx = idx;
            }
        }
        best_idx
    }

    /// Best matching unit as `(row, col)`; ties go to the first node in
    /// row-major order.
    pub fn bmu(&self, x: &[f64]) -> Result<(usize, usize)> {
        self.check_dim(x)?;
        let idx = self.bmu_index(x);
        Ok((idx / self.cols, idx % self.cols))
    }

    /// Online training for `steps` updates. At step `t` a sample is drawn
    /// uniformly, and every node moves toward it by
    /// `α(t)·exp(−g²/(2σ(t)²))` where `g` is the lattice distance to the
    /// BMU, `α(t) = α₀/(1 + 2t/T)` and `σ(t) = σ₀/(1 + 2t/T)`.
    pub fn train(&mut self, data: &[&[f64]], steps: usize, alpha0: f64, sigma0: f64) -> Result<()> {
        if data.is_empty() {
            return Err(Error::InvalidInput("no training data".into()));
        }
        for v in data {
            self.check_dim(v)?;
        }
        let mut rng = rng::stream(rng::mix_seed(self.seed, &[domain::SOM, 1]));
        let total = steps.max(1) as f64;
        for t in 0..steps {
            let x = data[rng.random_range(0..data.len())];
            let decay = 1.0 + 2.0 * t as f64 / total;
            self.update(x, alpha0 / decay, sigma0 / decay);
        }
        Ok(())
    }

    /// One update step toward `x` with the given rate and width.
    pub fn update(&mut self, x: &[f64], alpha: f64, sigma: f64) {
        let bmu = self.bmu_index(x);
        let (br, bc) = ((bmu / self.cols) as f64, (bmu % self.cols) as f64);
        let two_sigma_sq = 2.0 * sigma * sigma;
        for (idx, w) in self.prototypes.chunks_exact_mut(self.dim).enumerate() {
            let (r, c) = ((idx / self.cols) as f64, (idx % self.cols) as f64);
            let g2 = (r - br) * (r - br) + (c - bc) * (c - bc);
            let h = if two_sigma_sq > 0.0 {
                (-g2 / two_sigma_sq).exp()
            } else if g2 == 0.0 {
                1.0
            } else {
                0.0
            };
            let rate = alpha * h;
            if rate == 0.0 {
                continue;
            }
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += rate * (xk - *wk);
            }
        }
    }

    /// Majority-vote labelling. Tied classes are broken by a seeded random
    /// pick; nodes that win no sample take the class carried by most
    /// labelled nodes (smallest class on ties).
    pub fn label_nodes(&mut self, samples: &[Sample]) -> Result<()> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("no labelled samples".into()));
        }
        let nodes = self.node_count();
        let mut votes: Vec<[usize; 256]> = vec![[0; 256]; nodes];
        let mut hits = vec![0usize; nodes];
        for s in samples {
            self.check_dim(&s.vector)?;
            let idx = self.bmu_index(&s.vector);
            votes[idx][s.label as usize] += 1;
            hits[idx] += 1;
        }
        let mut rng = rng::stream(rng::mix_seed(self.seed, &[domain::SOM, 2]));
        let mut labels: Vec<Option<u8>> = votes
            .iter()
            .map(|v| {
                let top = *v.iter().max().expect("non-empty");
                if top == 0 {
                    return None;
                }
                let tied: Vec<u8> = (0..=255u8).filter(|&c| v[c as usize] == top).collect();
                Some(if tied.len() == 1 { tied[0] } else { tied[rng.random_range(0..tied.len())] })
            })
            .collect();
        let mut freq = [0usize; 256];
        labels.iter().flatten().for_each(|&l| freq[l as usize] += 1);
        let default = (0..=255u8).max_by_key(|&c| (freq[c as usize], std::cmp::Reverse(c))).expect("non-empty");
        labels.iter_mut().filter(|l| l.is_none()).for_each(|l| *l = Some(default));
        self.set_labels(labels.into_iter().map(|l| l.expect("filled")).collect(), hits);
        Ok(())
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        let labels = self.labels.as_ref().ok_or(Error::Unlabelled)?;
        self.check_dim(x)?;
        Ok(labels[self.bmu_index(x)])
    }

    /// Mean Euclidean distance from each prototype to its (up to eight)
    /// lattice neighbours.
    pub fn u_matrix(&self) -> UMatrix {
        let mut values = Vec::with_capacity(self.node_count());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let w = self.prototype(r, c);
                let (mut sum, mut count) = (0.0, 0usize);
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= self.rows as i64 || nc >= self.cols as i64 {
                            continue;
                        }
                        let v = self.prototype(nr as usize, nc as usize);
                        sum += w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        count += 1;
                    }
                }
                values.push(if count == 0 { 0.0 } else { sum / count as f64 });
            }
        }
        UMatrix { rows: self.rows, cols: self.cols, values }
    }
}

/// Per-node mean distance to neighbouring prototypes, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl UMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn median(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    }
}
