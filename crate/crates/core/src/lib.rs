//! Swarm behaviour simulation and comparison.
//!
//! The crate covers the whole pipeline: simulating six collective
//! behaviours ([`sim`]), turning swarm states into literature feature sets
//! ([`features`]), scoring behaviour pairs ([`similarity`]), classifying
//! short feature windows with a self-organising map ([`som`]) and running
//! the experiment grid with persisted artifacts ([`harness`]).

pub mod error;
pub mod features;
pub mod harness;
pub mod rng;
pub mod sim;
pub mod similarity;
pub mod som;

pub use error::{Error, Result};
pub use features::{FeatureSeries, FeatureSet};
pub use sim::{ArenaConfig, Behaviour, BehaviourParams, BoundaryMode, RunId, Setting, SimConfig, SwarmState, Trajectory};
pub use similarity::Measure;
pub use som::{Sample, SomConfig, SomModel};
