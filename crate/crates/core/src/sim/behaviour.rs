use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::arena::{angle_diff, normalize_angle, ArenaConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behaviour {
    Reynolds,
    Vicsek,
    Aggregation,
    Dispersion,
    Ballistic,
    Brownian,
}

impl Behaviour {
    pub const ALL: [Behaviour; 6] = [
        Behaviour::Reynolds,
        Behaviour::Vicsek,
        Behaviour::Aggregation,
        Behaviour::Dispersion,
        Behaviour::Ballistic,
        Behaviour::Brownian,
    ];

    pub fn ordinal(self) -> u64 {
        self as u64
    }

    /// Numerical class label in `1..=6`.
    pub fn class_label(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_class_label(label: u8) -> Option<Self> {
        Behaviour::ALL.get(usize::from(label).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Behaviour::Reynolds => "reynolds",
            Behaviour::Vicsek => "vicsek",
            Behaviour::Aggregation => "aggregation",
            Behaviour::Dispersion => "dispersion",
            Behaviour::Ballistic => "ballistic",
            Behaviour::Brownian => "brownian",
        }
    }
}

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Behaviour {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Behaviour::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown behaviour `{s}`")))
    }
}

/// Tunable parameters shared by all behaviour rules. Angles in radians,
/// lengths in px, speed in px per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviourParams {
    pub speed: f64,
    /// Alignment and cohesion neighbourhood of the boids rule.
    pub reynolds_radius: f64,
    pub separation_radius: f64,
    pub vicsek_radius: f64,
    pub aggregation_radius: f64,
    pub dispersion_radius: f64,
    pub w_sep: f64,
    pub w_align: f64,
    pub w_coh: f64,
    pub noise_eta: f64,
    pub turn_sigma: f64,
    pub max_turn: f64,
}

impl Default for BehaviourParams {
    fn default() -> Self {
        Self {
            speed: 0.5,
            reynolds_radius: 150.0,
            separation_radius: 25.0,
            vicsek_radius: 150.0,
            aggregation_radius: 30.0,
            dispersion_radius: 120.0,
            w_sep: 1.5,
            w_align: 6.0,
            w_coh: 0.5,
            noise_eta: 0.3,
            turn_sigma: 0.3,
            max_turn: 0.3,
        }
    }
}

impl BehaviourParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("speed", self.speed),
            ("reynolds_radius", self.reynolds_radius),
            ("separation_radius", self.separation_radius),
            ("vicsek_radius", self.vicsek_radius),
            ("aggregation_radius", self.aggregation_radius),
            ("dispersion_radius", self.dispersion_radius),
            ("max_turn", self.max_turn),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("noise_eta", self.noise_eta),
            ("turn_sigma", self.turn_sigma),
            ("w_sep", self.w_sep),
            ("w_align", self.w_align),
            ("w_coh", self.w_coh),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

fn unit(dx: f64, dy: f64) -> Option<(f64, f64)> {
    let n = dx.hypot(dy);
    (n > 1e-12).then(|| (dx / n, dy / n))
}

fn steer(current: f64, desired: f64, max_turn: f64) -> f64 {
    let d = angle_diff(current, desired).clamp(-max_turn, max_turn);
    normalize_angle(current + d)
}

/// Compute every agent's next heading from the current positions and
/// headings. Updates are synchronous: all rules read the pre-step state.
/// Random draws happen in agent index order.
pub(crate) fn next_headings<R: Rng>(
    behaviour: Behaviour,
    positions: &[(f64, f64)],
    headings: &[f64],
    params: &BehaviourParams,
    arena: &ArenaConfig,
    rng: &mut R,
) -> Vec<f64> {
    let n = positions.len();
    match behaviour {
        Behaviour::Ballistic => headings.to_vec(),
        Behaviour::Brownian => {
            let normal = Normal::new(0.0, params.turn_sigma).expect("turn_sigma validated");
            headings
                .iter()
                .map(|&h| normalize_angle(h + normal.sample(rng)))
                .collect()
        }
        Behaviour::Vicsek => (0..n)
            .map(|i| {
                let r = params.vicsek_radius;
                let (mut sx, mut sy) = (headings[i].cos(), headings[i].sin());
                for j in (0..n).filter(|&j| j != i) {
                    if arena.distance(positions[i], positions[j]) <= r {
                        sx += headings[j].cos();
                        sy += headings[j].sin();
                    }
                }
                let noise = if params.noise_eta > 0.0 {
                    rng.random_range(-0.5..0.5) * params.noise_eta
                } else {
                    0.0
                };
                let mean = if sx.hypot(sy) > 1e-12 { sy.atan2(sx) } else { headings[i] };
                normalize_angle(mean + noise)
            })
            .collect(),
        Behaviour::Aggregation => (0..n)
            .map(|i| {
                let r = params.aggregation_radius;
                let (mut cx, mut cy, mut count) = (0.0, 0.0, 0usize);
                for j in (0..n).filter(|&j| j != i) {
                    let (dx, dy) = arena.displacement(positions[i], positions[j]);
                    if dx.hypot(dy) <= r {
                        cx += dx;
                        cy += dy;
                        count += 1;
                    }
                }
                match (count > 0).then(|| unit(cx, cy)).flatten() {
                    Some((ux, uy)) => steer(headings[i], uy.atan2(ux), params.max_turn),
                    None => headings[i],
                }
            })
            .collect(),
        Behaviour::Dispersion => (0..n)
            .map(|i| {
                let r = params.dispersion_radius;
                let nearest = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let d = arena.displacement(positions[i], positions[j]);
                        (d.0.hypot(d.1), d)
                    })
                    .filter(|(dist, _)| *dist <= r)
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                match nearest.and_then(|(_, (dx, dy))| unit(-dx, -dy)) {
                    Some((ux, uy)) => steer(headings[i], uy.atan2(ux), params.max_turn),
                    None => headings[i],
                }
            })
            .collect(),
        Behaviour::Reynolds => (0..n)
            .map(|i| {
                let r = params.reynolds_radius;
                let (mut sep, mut align, mut coh) = ((0.0, 0.0), (0.0, 0.0), (0.0, 0.0));
                let mut flockmates = 0usize;
                for j in (0..n).filter(|&j| j != i) {
                    let (dx, dy) = arena.displacement(positions[i], positions[j]);
                    let d = dx.hypot(dy);
                    if d > r {
                        continue;
                    }
                    flockmates += 1;
                    align.0 += headings[j].cos();
                    align.1 += headings[j].sin();
                    coh.0 += dx;
                    coh.1 += dy;
                    if d < params.separation_radius {
                        if let Some((ux, uy)) = unit(-dx, -dy) {
                            sep.0 += ux;
                            sep.1 += uy;
                        }
                    }
                }
                if flockmates == 0 {
                    return headings[i];
                }
                let mut desired = (0.0, 0.0);
                for (w, v) in [(params.w_sep, sep), (params.w_align, align), (params.w_coh, coh)] {
                    if let Some((ux, uy)) = unit(v.0, v.1) {
                        desired.0 += w * ux;
                        desired.1 += w * uy;
                    }
                }
                match unit(desired.0, desired.1) {
                    Some((ux, uy)) => steer(headings[i], uy.atan2(ux), params.max_turn),
                    None => headings[i],
                }
            })
            .collect(),
    }
}

/// Uniform heading in `[0, 2π)`.
pub(crate) fn random_heading<R: Rng>(rng: &mut R) -> f64 {
    normalize_angle(rng.random::<f64>() * TAU)
}
