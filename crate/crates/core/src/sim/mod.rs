//! Constant-speed point-agent simulation of the six collective behaviours.

mod arena;
mod behaviour;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use arena::{angle_diff, normalize_angle, ArenaConfig, BoundaryMode, Setting};
pub use behaviour::{Behaviour, BehaviourParams};

use crate::error::{Error, Result};
use crate::rng::{self, domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl AgentState {
    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn velocity(&self, speed: f64) -> (f64, f64) {
        (speed * self.heading.cos(), speed * self.heading.sin())
    }
}

/// Agents at one step. Agent order is fixed for the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub step: usize,
    pub agents: Vec<AgentState>,
}

impl SwarmState {
    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.agents.iter().map(AgentState::position).collect()
    }

    pub fn headings(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.heading).collect()
    }
}

/// Identity of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunId {
    pub behaviour: Behaviour,
    pub setting: Setting,
    pub replicate: usize,
}

impl RunId {
    pub fn new(behaviour: Behaviour, setting: Setting, replicate: usize) -> Self {
        Self { behaviour, setting, replicate }
    }

    /// Seed of the initial placement. Shared by every behaviour with the same
    /// setting and replicate, so behaviour pairs start from identical states.
    pub fn init_seed(&self, base_seed: u64) -> u64 {
        rng::mix_seed(base_seed, &[domain::INIT, self.setting.ordinal(), self.replicate as u64])
    }

    /// Seed of the per-step noise stream.
    pub fn dynamics_seed(&self, base_seed: u64) -> u64 {
        rng::mix_seed(
            base_seed,
            &[domain::DYNAMICS, self.behaviour.ordinal(), self.setting.ordinal(), self.replicate as u64],
        )
    }

    /// Seed of the agent subsample. Behaviour-independent for the same reason
    /// as [`RunId::init_seed`].
    pub fn subsample_seed(&self, base_seed: u64) -> u64 {
        rng::mix_seed(base_seed, &[domain::SUBSAMPLE, self.setting.ordinal(), self.replicate as u64])
    }
}

/// Simulation knobs that are not behaviour rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub side: f64,
    pub total_steps: usize,
    pub transient: usize,
    pub params: BehaviourParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { side: 500.0, total_steps: 1250, transient: 250, params: BehaviourParams::default() }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        ArenaConfig::new(self.side, BoundaryMode::Bounded)?;
        if self.total_steps <= self.transient {
            return Err(Error::Config(format!(
                "total_steps ({}) must exceed the transient ({})",
                self.total_steps, self.transient
            )));
        }
        Ok(())
    }

    pub fn arena(&self, setting: Setting) -> Result<ArenaConfig> {
        ArenaConfig::new(self.side, setting.boundary())
    }
}

/// Uniform placement over the arena with uniform headings.
pub fn init_swarm(run: RunId, base_seed: u64, side: f64) -> Result<SwarmState> {
    let arena = ArenaConfig::new(side, run.setting.boundary())?;
    let mut rng = rng::stream(run.init_seed(base_seed));
    let agents = (0..run.setting.agents())
        .map(|_| {
            let x = rng.random::<f64>() * arena.side();
            let y = rng.random::<f64>() * arena.side();
            let heading = behaviour::random_heading(&mut rng);
            AgentState { x, y, heading }
        })
        .collect();
    Ok(SwarmState { step: 0, agents })
}

/// Advance one step: update headings, move by `speed`, then apply the boundary.
pub fn step<R: Rng>(
    state: &SwarmState,
    behaviour: Behaviour,
    params: &BehaviourParams,
    arena: &ArenaConfig,
    rng: &mut R,
) -> SwarmState {
    let positions = state.positions();
    let headings = state.headings();
    let next = behaviour::next_headings(behaviour, &positions, &headings, params, arena, rng);
    let agents = positions
        .iter()
        .zip(next)
        .map(|(&(x, y), h)| {
            let (x, y, heading) =
                arena.apply_boundary(x + params.speed * h.cos(), y + params.speed * h.sin(), h);
            AgentState { x, y, heading }
        })
        .collect();
    SwarmState { step: state.step + 1, agents }
}

/// One complete run, transient included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub run: RunId,
    pub base_seed: u64,
    pub speed: f64,
    pub arena: ArenaConfig,
    pub states: Vec<SwarmState>,
}

impl Trajectory {
    pub fn agent_count(&self) -> usize {
        self.states.first().map_or(0, |s| s.agents.len())
    }

    /// Keep only the listed agents, in the given order, at every step.
    pub fn restrict(&self, indices: &[usize]) -> Trajectory {
        let states = self
            .states
            .iter()
            .map(|s| SwarmState { step: s.step, agents: indices.iter().map(|&i| s.agents[i]).collect() })
            .collect();
        Trajectory { states, ..*self }
    }
}

/// Simulate `config.total_steps` states (step 0 is the initial placement).
pub fn simulate(run: RunId, base_seed: u64, config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let arena = config.arena(run.setting)?;
    let mut rng = rng::stream(run.dynamics_seed(base_seed));
    let mut states = Vec::with_capacity(config.total_steps);
    states.push(init_swarm(run, base_seed, config.side)?);
    for _ in 1..config.total_steps {
        let next = step(states.last().expect("non-empty"), run.behaviour, &config.params, &arena, &mut rng);
        states.push(next);
    }
    Ok(Trajectory { run, base_seed, speed: config.params.speed, arena, states })
}
