//! Per-step feature sets computed from swarm states.
//!
//! Two sets describe the whole swarm with a fixed number of scalars
//! ([`FeatureSet::Alharthi2022`], [`FeatureSet::Yang2023`]); the other two
//! concatenate a small block per agent ([`FeatureSet::Gomes2013`],
//! [`FeatureSet::Gharbi2023`]). Every value is mapped to `[0, 1]` with a
//! fixed bounds table, see [`bounds_table`].

mod geometry;
mod graph;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use geometry::{
    bounding_box_area, centroid, convex_hull_area, mean_nearest_neighbour_distance, nearest_neighbour_distances,
    order_parameter,
};
pub use graph::ProximityGraph;

use crate::error::{Error, Result};
use crate::rng;
use crate::sim::{ArenaConfig, RunId, SwarmState, Trajectory};

/// Version tag of [`bounds_table`]; cached feature files record it.
pub const BOUNDS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Alharthi2022,
    Gomes2013,
    Yang2023,
    Gharbi2023,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] =
        [FeatureSet::Alharthi2022, FeatureSet::Gomes2013, FeatureSet::Yang2023, FeatureSet::Gharbi2023];

    pub fn ordinal(self) -> u64 {
        self as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Alharthi2022 => "alharthi2022",
            FeatureSet::Gomes2013 => "gomes2013",
            FeatureSet::Yang2023 => "yang2023",
            FeatureSet::Gharbi2023 => "gharbi2023",
        }
    }

    /// Width of the per-agent block for agent-level sets, `None` for
    /// swarm-level sets.
    pub fn agent_width(self) -> Option<usize> {
        match self {
            FeatureSet::Gomes2013 => Some(4),
            FeatureSet::Gharbi2023 => Some(1),
            FeatureSet::Alharthi2022 | FeatureSet::Yang2023 => None,
        }
    }

    pub fn is_agent_level(self) -> bool {
        self.agent_width().is_some()
    }

    pub fn dimension(self, agents: usize) -> usize {
        match self {
            FeatureSet::Alharthi2022 => 8,
            FeatureSet::Yang2023 => 6,
            FeatureSet::Gomes2013 => 4 * agents,
            FeatureSet::Gharbi2023 => agents,
        }
    }

    pub fn feature_names(self, agents: usize) -> Vec<String> {
        let fixed = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        match self {
            FeatureSet::Alharthi2022 => fixed(&[
                "max_swarm_shift",
                "centre_of_mass",
                "swarm_mode_index",
                "longest_path",
                "max_radius",
                "avg_local_density",
                "avg_nn_distance",
                "beta_index",
            ]),
            FeatureSet::Yang2023 => {
                fixed(&["collision_count", "flock_density", "grouping", "straggler_count", "order", "subgroup_count"])
            }
            FeatureSet::Gomes2013 => (0..agents)
                .flat_map(|i| ["x", "y", "vx", "vy"].map(|f| format!("agent{i}_{f}")))
                .collect(),
            FeatureSet::Gharbi2023 => (0..agents).map(|i| format!("nn_rank{i}")).collect(),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature set `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Proximity-graph and local-density radius, px.
    pub connection_radius: f64,
    /// Pairs closer than this count as collisions, px.
    pub collision_radius: f64,
    /// Swarm mode index threshold, as a fraction of half the arena side.
    pub mode_threshold: f64,
    /// Grid cell used to locate the densest region, px.
    pub mode_cell: f64,
    /// Steps over which the maximum centroid shift is taken.
    pub shift_window: usize,
    /// Added to degenerate hull areas in the flock density, px².
    pub hull_epsilon: f64,
    /// Agents kept for agent-level sets.
    pub subsample_agents: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            connection_radius: 50.0,
            collision_radius: 5.0,
            mode_threshold: 0.5,
            mode_cell: 25.0,
            shift_window: 5,
            hull_epsilon: 1.0,
            subsample_agents: 30,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("connection_radius", self.connection_radius),
            ("collision_radius", self.collision_radius),
            ("mode_threshold", self.mode_threshold),
            ("mode_cell", self.mode_cell),
            ("hull_epsilon", self.hull_epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.shift_window == 0 || self.subsample_agents == 0 {
            return Err(Error::Config("shift_window and subsample_agents must be at least 1".into()));
        }
        Ok(())
    }
}

/// Linear normalisation range of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
}

impl Bound {
    pub const UNIT: Bound = Bound { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

/// `clamp((v − lo) / (hi − lo), 0, 1)` per feature.
pub fn normalize(raw: &[f64], bounds: &[Bound]) -> Result<Vec<f64>> {
    if bounds.len() < raw.len() {
        return Err(Error::Config(format!("no normalisation bound for feature {}", bounds.len())));
    }
    raw.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&v, b))| {
            if b.hi.partial_cmp(&b.lo) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Config(format!("empty normalisation range for feature {i}")));
            }
            Ok(((v - b.lo) / (b.hi - b.lo)).clamp(0.0, 1.0))
        })
        .collect()
}

/// Normalisation ranges for `set` on a swarm of `agents` agents.
///
/// | feature | range |
/// |---|---|
/// | positions | `[0, side]` |
/// | velocity components | `[−speed, speed]` |
/// | distances (centre of mass, radius, nearest neighbour) | `[0, side·√2]` |
/// | max swarm shift | `[0, speed]` (one step of centroid motion) |
/// | longest path | `[0, N − 1]` hops |
/// | beta index | `[0, (N − 1) / 2]` |
/// | collision count | `[0, N(N − 1)/2]` pairs |
/// | straggler and subgroup counts | `[0, N]` |
/// | flock density | `[0, N / (π·R²)]`, N agents packed in one interaction disc |
/// | fractions (mode index, local density, grouping, order) | `[0, 1]` |
pub fn bounds_table(set: FeatureSet, agents: usize, arena: &ArenaConfig, speed: f64, cfg: &FeatureConfig) -> Vec<Bound> {
    let n = agents as f64;
    let dist = Bound::new(0.0, arena.side() * std::f64::consts::SQRT_2);
    let at_least_one = |v: f64| v.max(1.0);
    match set {
        FeatureSet::Alharthi2022 => vec![
            Bound::new(0.0, speed),
            dist,
            Bound::UNIT,
            Bound::new(0.0, at_least_one(n - 1.0)),
            dist,
            Bound::UNIT,
            dist,
            Bound::new(0.0, at_least_one((n - 1.0) / 2.0)),
        ],
        FeatureSet::Yang2023 => vec![
            Bound::new(0.0, at_least_one(n * (n - 1.0) / 2.0)),
            Bound::new(0.0, n / (std::f64::consts::PI * cfg.connection_radius.powi(2))),
            Bound::UNIT,
            Bound::new(0.0, n),
            Bound::UNIT,
            Bound::new(0.0, n),
        ],
        FeatureSet::Gomes2013 => {
            let pos = Bound::new(0.0, arena.side());
            let vel = Bound::new(-speed, speed);
            (0..agents).flat_map(|_| [pos, pos, vel, vel]).collect()
        }
        FeatureSet::Gharbi2023 => vec![dist; agents],
    }
}

/// Per-step feature vectors of one run after transient removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    pub run: RunId,
    pub feature_set: FeatureSet,
    /// Agents represented; equals the subsample size for agent-level sets.
    pub agents: usize,
    pub steps: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Restrict a trajectory to a uniformly random `k`-subset of its agents. The
/// subset keeps the original relative order and is the same at every step.
pub fn subsample_agents(trajectory: &Trajectory, k: usize, seed: u64) -> Result<(Trajectory, Vec<usize>)> {
    let n = trajectory.agent_count();
    if k > n {
        return Err(Error::InvalidInput(format!("cannot subsample {k} agents from {n}")));
    }
    if k == n {
        return Ok((trajectory.clone(), (0..n).collect()));
    }
    let mut indices = index::sample(&mut rng::stream(seed), n, k).into_vec();
    indices.sort_unstable();
    Ok((trajectory.restrict(&indices), indices))
}

struct StepContext<'a> {
    arena: &'a ArenaConfig,
    speed: f64,
    cfg: &'a FeatureConfig,
}

/// Raw (unnormalised) Alharthi2022 vector. `recent_centroids` holds the
/// centroids of up to `shift_window + 1` steps ending at this one.
fn alharthi_raw(state: &SwarmState, recent_centroids: &[(f64, f64)], ctx: &StepContext) -> Vec<f64> {
    let positions = state.positions();
    let n = positions.len();
    let arena = ctx.arena;
    let c = *recent_centroids.last().expect("current centroid present");

    let max_shift = recent_centroids
        .windows(2)
        .map(|w| arena.distance(w[0], w[1]))
        .fold(0.0, f64::max);
    let centre_of_mass = arena.distance(c, arena.centre());
    let mode_index = swarm_mode_index(&positions, ctx);
    let graph = ProximityGraph::new(&positions, ctx.cfg.connection_radius, arena);
    let longest_path = graph.longest_path() as f64;
    let max_radius = positions.iter().map(|&p| arena.distance(p, c)).fold(0.0, f64::max);
    let local_density = 2.0 * graph.edges().len() as f64 / (n * (n - 1)) as f64;
    let nn = mean_nearest_neighbour_distance(&positions, arena);

    vec![max_shift, centre_of_mass, mode_index, longest_path, max_radius, local_density, nn, graph.beta_index()]
}

/// Fraction of agents within `mode_threshold · side / 2` of the centre of
/// the most populated grid cell (lowest cell index on ties).
fn swarm_mode_index(positions: &[(f64, f64)], ctx: &StepContext) -> f64 {
    let side = ctx.arena.side();
    let cell = ctx.cfg.mode_cell;
    let cells = (side / cell).ceil().max(1.0) as usize;
    let bin = |v: f64| ((v / cell).floor().max(0.0) as usize).min(cells - 1);
    let mut counts = vec![0usize; cells * cells];
    for &(x, y) in positions {
        counts[bin(y) * cells + bin(x)] += 1;
    }
    let best = counts
        .iter()
        .enumerate()
        .fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc })
        .0;
    let centre = (((best % cells) as f64 + 0.5) * cell, ((best / cells) as f64 + 0.5) * cell);
    let reach = ctx.cfg.mode_threshold * side / 2.0;
    let within = positions.iter().filter(|&&p| ctx.arena.distance(p, centre) <= reach).count();
    within as f64 / positions.len() as f64
}

fn yang_raw(state: &SwarmState, ctx: &StepContext) -> Vec<f64> {
    let positions = state.positions();
    let n = positions.len();
    let mut collisions = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if ctx.arena.distance(positions[i], positions[j]) < ctx.cfg.collision_radius {
                collisions += 1;
            }
        }
    }
    let hull = convex_hull_area(&positions);
    let density = if hull > 1e-9 {
        n as f64 / hull
    } else {
        n as f64 / (ctx.cfg.hull_epsilon + bounding_box_area(&positions))
    };
    let graph = ProximityGraph::new(&positions, ctx.cfg.connection_radius, ctx.arena);
    let comps = graph.components();
    let largest = comps.iter().map(Vec::len).max().unwrap_or(0);
    let stragglers = comps.iter().filter(|c| c.len() == 1).count();
    vec![
        collisions as f64,
        density,
        largest as f64 / n as f64,
        stragglers as f64,
        order_parameter(&state.headings()),
        comps.len() as f64,
    ]
}

fn gomes_raw(state: &SwarmState, ctx: &StepContext) -> Vec<f64> {
    state
        .agents
        .iter()
        .flat_map(|a| {
            let (vx, vy) = a.velocity(ctx.speed);
            [a.x, a.y, vx, vy]
        })
        .collect()
}

fn gharbi_raw(state: &SwarmState, ctx: &StepContext) -> Vec<f64> {
    let mut d = nearest_neighbour_distances(&state.positions(), ctx.arena);
    d.sort_by(f64::total_cmp);
    d
}

/// Feature vectors for every step from `transient` on. Agent-level sets use
/// every agent of `trajectory`; subsample first with [`subsample_agents`].
pub fn extract(trajectory: &Trajectory, set: FeatureSet, cfg: &FeatureConfig, transient: usize) -> Result<FeatureSeries> {
    cfg.validate()?;
    let n = trajectory.agent_count();
    if n < 2 && matches!(set, FeatureSet::Alharthi2022 | FeatureSet::Gharbi2023) {
        return Err(Error::InvalidInput(format!("{set} needs at least 2 agents, got {n}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("trajectory has no agents".into()));
    }
    if transient >= trajectory.states.len() {
        return Err(Error::InvalidInput(format!(
            "transient {transient} leaves no steps of a {}-step trajectory",
            trajectory.states.len()
        )));
    }
    let ctx = StepContext { arena: &trajectory.arena, speed: trajectory.speed, cfg };
    let bounds = bounds_table(set, n, &trajectory.arena, trajectory.speed, cfg);
    let centroids: Vec<(f64, f64)> = match set {
        FeatureSet::Alharthi2022 => {
            trajectory.states.iter().map(|s| centroid(&s.positions(), &trajectory.arena)).collect()
        }
        _ => Vec::new(),
    };

    let mut steps = Vec::with_capacity(trajectory.states.len() - transient);
    let mut rows = Vec::with_capacity(trajectory.states.len() - transient);
    for (t, state) in trajectory.states.iter().enumerate().skip(transient) {
        let raw = match set {
            FeatureSet::Alharthi2022 => {
                let from = t.saturating_sub(cfg.shift_window);
                alharthi_raw(state, &centroids[from..=t], &ctx)
            }
            FeatureSet::Yang2023 => yang_raw(state, &ctx),
            FeatureSet::Gomes2013 => gomes_raw(state, &ctx),
            FeatureSet::Gharbi2023 => gharbi_raw(state, &ctx),
        };
        steps.push(state.step);
        rows.push(normalize(&raw, &bounds)?);
    }
    Ok(FeatureSeries { run: trajectory.run, feature_set: set, agents: n, steps, rows })
}

/// Raw feature vector of a single state, without history (the maximum
/// swarm shift is then zero). Mostly useful for inspection and tests.
pub fn raw_features(state: &SwarmState, set: FeatureSet, arena: &ArenaConfig, speed: f64, cfg: &FeatureConfig) -> Vec<f64> {
    let ctx = StepContext { arena, speed, cfg };
    match set {
        FeatureSet::Alharthi2022 => alharthi_raw(state, &[centroid(&state.positions(), arena)], &ctx),
        FeatureSet::Yang2023 => yang_raw(state, &ctx),
        FeatureSet::Gomes2013 => gomes_raw(state, &ctx),
        FeatureSet::Gharbi2023 => gharbi_raw(state, &ctx),
    }
}

/// Subsample (agent-level sets on swarms larger than the configured size)
/// and extract. Returns the series and the agent indices it covers.
pub fn extract_run(
    trajectory: &Trajectory,
    set: FeatureSet,
    cfg: &FeatureConfig,
    transient: usize,
) -> Result<(FeatureSeries, Vec<usize>)> {
    let n = trajectory.agent_count();
    if set.is_agent_level() && n > cfg.subsample_agents {
        let seed = trajectory.run.subsample_seed(trajectory.base_seed);
        let (sub, idx) = subsample_agents(trajectory, cfg.subsample_agents, seed)?;
        Ok((extract(&sub, set, cfg, transient)?, idx))
    } else {
        Ok((extract(trajectory, set, cfg, transient)?, (0..n).collect()))
    }
}
