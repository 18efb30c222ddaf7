//! Target selection: the proximal planner for nearby activated nodes and
//! the region-sequence planner for global ordering when nothing is nearby.

pub mod proximal;
pub mod sequence;
pub mod tsp;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec3;

pub use proximal::{
    find_proximal_target, initial_turn_time, position_cost, refine_yaw, start_nodes,
    viewpoint_for_node,
    CandidateTarget, CostBreakdown, ProximalOutcome, ProximalParams,
};
pub use sequence::{build_cost_matrix, next_global_target, CostMatrix};
pub use tsp::{solve_tsp, tour_cost, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
    pub yaw_rate: f64,
}

impl UavState {
    pub fn at_rest(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            yaw,
            yaw_rate: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicLimits {
    /// Per-axis horizontal speed limit (m/s).
    pub v_max: f64,
    pub a_max: f64,
    pub v_z_max: f64,
    /// Yaw rate limit (rad/s).
    pub omega_max: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self {
            v_max: 2.0,
            a_max: 2.0,
            v_z_max: 2.0,
            omega_max: 1.57,
        }
    }
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("v_z_max", self.v_z_max),
            ("omega_max", self.omega_max),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub position: Vec3,
    pub yaw: f64,
    /// Number of visible frontier cells.
    pub gain: usize,
}
