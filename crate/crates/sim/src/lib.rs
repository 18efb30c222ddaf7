//! Deterministic closed-loop simulator for skeleton-graph exploration.
//!
//! A run generates (or loads) a ground-truth voxel world, flies a kinematic
//! vehicle with a depth camera through it and drives the planners from
//! `skelex-core` until no reachable frontier remains. The [`bench`] module
//! repeats runs over seeds and planner variants and aggregates the results.

pub mod bench;
pub mod config;
pub mod env;
pub mod error;
pub mod explore;
pub mod metrics;
pub mod motion;
pub mod scenario;
pub mod sensor;

pub use config::RunConfig;
pub use error::{Result, SimError};
pub use explore::{run_exploration, AblationFlags};
pub use metrics::{MetricsRecord, Phase, RunOutput};
pub use scenario::Scenario;
