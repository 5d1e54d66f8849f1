//! Brute-force oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use swarmcmp_core::sim::{AgentState, ArenaConfig, RunId};
use swarmcmp_core::{Behaviour, FeatureSeries, FeatureSet, Setting, SwarmState};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFacts {
    pub edges: usize,
    pub beta: f64,
    pub subgroups: usize,
    pub largest: usize,
    pub stragglers: usize,
    pub longest_path: usize,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = i;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Union-find components and Floyd-Warshall hop distances.
pub fn graph_oracle(positions: &[(f64, f64)], radius: f64, arena: &ArenaConfig) -> GraphFacts {
    let n = positions.len();
    let inf = usize::MAX / 4;
    let mut hops = vec![vec![inf; n]; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut edges = 0;
    for i in 0..n {
        hops[i][i] = 0;
        for j in i + 1..n {
            if arena.distance(positions[i], positions[j]) <= radius {
                edges += 1;
                hops[i][j] = 1;
                hops[j][i] = 1;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if hops[i][k] + hops[k][j] < hops[i][j] {
                    hops[i][j] = hops[i][k] + hops[k][j];
                }
            }
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        *sizes.entry(find(&mut parent, i)).or_default() += 1;
    }
    let largest = sizes.values().copied().max().unwrap_or(0);
    let mut longest_path = 0;
    for i in 0..n {
        if sizes[&find(&mut parent, i)] != largest {
            continue;
        }
        for &h in &hops[i] {
            if h < inf {
                longest_path = longest_path.max(h);
            }
        }
    }
    GraphFacts {
        edges,
        beta: edges as f64 / n as f64,
        subgroups: sizes.len(),
        largest,
        stragglers: sizes.values().filter(|&&s| s == 1).count(),
        longest_path,
    }
}

pub fn brute_nn(positions: &[(f64, f64)], arena: &ArenaConfig) -> Vec<f64> {
    (0..positions.len())
        .map(|i| {
            (0..positions.len())
                .filter(|&j| j != i)
                .map(|j| arena.distance(positions[i], positions[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn level_char(v: f64, tau: f64) -> char {
    if v < tau {
        'L'
    } else if v > 1.0 - tau {
        'H'
    } else {
        'M'
    }
}

/// Combined state count via string-keyed hash maps.
pub fn csc_oracle(a: &FeatureSeries, b: &FeatureSeries, tau: f64) -> f64 {
    let count = |s: &FeatureSeries| {
        let width = match s.feature_set {
            FeatureSet::Gomes2013 => 4,
            FeatureSet::Gharbi2023 => 1,
            _ => s.rows[0].len(),
        };
        let mut map: HashMap<String, i64> = HashMap::new();
        for row in &s.rows {
            for block in row.chunks(width) {
                *map.entry(block.iter().map(|&v| level_char(v, tau)).collect()).or_default() += 1;
            }
        }
        map
    };
    let (ma, mb) = (count(a), count(b));
    let mut keys: Vec<&String> = ma.keys().chain(mb.keys()).collect();
    keys.sort();
    keys.dedup();
    let diff: i64 = keys.iter().map(|k| (ma.get(*k).unwrap_or(&0) - mb.get(*k).unwrap_or(&0)).abs()).sum();
    let total: i64 = ma.values().sum::<i64>() + mb.values().sum::<i64>();
    diff as f64 / total as f64
}

pub fn random_positions<R: Rng>(rng: &mut R, n: usize, side: f64) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.random_range(0.0..side), rng.random_range(0.0..side))).collect()
}

pub fn state_of(positions: &[(f64, f64)], headings: &[f64]) -> SwarmState {
    SwarmState {
        step: 0,
        agents: positions.iter().zip(headings).map(|(&(x, y), &heading)| AgentState { x, y, heading }).collect(),
    }
}

/// Values drawn to land on level boundaries often.
pub fn toy_value<R: Rng>(rng: &mut R) -> f64 {
    const PICKS: [f64; 7] = [0.0, 0.005, 0.01, 0.5, 0.99, 0.995, 1.0];
    if rng.random_bool(0.6) {
        PICKS[rng.random_range(0..PICKS.len())]
    } else {
        rng.random_range(0.0..=1.0)
    }
}

pub fn random_series<R: Rng>(rng: &mut R, set: FeatureSet, agents: usize, steps: usize) -> FeatureSeries {
    let dim = set.dimension(agents);
    FeatureSeries {
        run: RunId::new(Behaviour::Ballistic, Setting::Bounded40, 0),
        feature_set: set,
        agents,
        steps: (0..steps).collect(),
        rows: (0..steps).map(|_| (0..dim).map(|_| toy_value(rng)).collect()).collect(),
    }
}
