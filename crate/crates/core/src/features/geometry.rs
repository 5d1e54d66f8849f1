use std::f64::consts::TAU;

use crate::sim::{ArenaConfig, BoundaryMode};

/// Swarm centroid. On a torus the per-axis circular mean is used so the
/// centroid does not jump when an agent crosses the seam.
pub fn centroid(positions: &[(f64, f64)], arena: &ArenaConfig) -> (f64, f64) {
    let n = positions.len().max(1) as f64;
    let arithmetic = || {
        let (sx, sy) = positions.iter().fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x, ay + y));
        (sx / n, sy / n)
    };
    match arena.boundary() {
        BoundaryMode::Bounded => arithmetic(),
        BoundaryMode::Unbounded => {
            let side = arena.side();
            let axis = |coord: &dyn Fn(&(f64, f64)) -> f64, fallback: f64| {
                let (c, s) = positions.iter().fold((0.0, 0.0), |(c, s), p| {
                    let a = coord(p) / side * TAU;
                    (c + a.cos(), s + a.sin())
                });
                if c.hypot(s) < 1e-9 * n {
                    return fallback;
                }
                let v = s.atan2(c).rem_euclid(TAU) / TAU * side;
                if v >= side {
                    0.0
                } else {
                    v
                }
            };
            let (ax, ay) = arithmetic();
            (axis(&|p| p.0, ax), axis(&|p| p.1, ay))
        }
    }
}

/// Distance from each agent to its nearest other agent. Requires at least two
/// agents.
pub fn nearest_neighbour_distances(positions: &[(f64, f64)], arena: &ArenaConfig) -> Vec<f64> {
    positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            positions
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| arena.distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn mean_nearest_neighbour_distance(positions: &[(f64, f64)], arena: &ArenaConfig) -> f64 {
    let d = nearest_neighbour_distances(positions, arena);
    d.iter().sum::<f64>() / d.len() as f64
}

/// Magnitude of the mean unit heading vector, in `[0, 1]`.
pub fn order_parameter(headings: &[f64]) -> f64 {
    if headings.is_empty() {
        return 0.0;
    }
    let (c, s) = headings.iter().fold((0.0, 0.0), |(c, s), h| (c + h.cos(), s + h.sin()));
    (c.hypot(s) / headings.len() as f64).min(1.0)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Area of the convex hull (monotone chain + shoelace).
pub fn convex_hull_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let start = hull.len();
        for &p in pass {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let area2: f64 = (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    area2.abs() / 2.0
}

pub fn bounding_box_area(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for &(x, y) in points {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    (hi.0 - lo.0) * (hi.1 - lo.1)
}
