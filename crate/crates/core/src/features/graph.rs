use std::collections::VecDeque;

use crate::sim::ArenaConfig;

/// Undirected unit-disc graph over agents: `(i, j)` is an edge iff the two
/// agents are within `radius` of each other under the arena metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    n: usize,
    radius: f64,
    /// `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ProximityGraph {
    pub fn new(positions: &[(f64, f64)], radius: f64, arena: &ArenaConfig) -> Self {
        let n = positions.len();
        let mut edges = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if arena.distance(positions[i], positions[j]) <= radius {
                    edges.push((i, j));
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        Self { n, radius, edges, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// |E| / |N|.
    pub fn beta_index(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.edges.len() as f64 / self.n as f64
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn hops_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes are reached");
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Diameter in hops of the largest component (the widest one when
    /// several share the largest size). Zero for an edgeless graph.
    pub fn longest_path(&self) -> usize {
        let comps = self.components();
        let Some(largest) = comps.iter().map(Vec::len).max() else {
            return 0;
        };
        comps
            .iter()
            .filter(|c| c.len() == largest)
            .map(|c| {
                c.iter()
                    .map(|&s| self.hops_from(s).into_iter().flatten().max().unwrap_or(0))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}
