//! Run configuration: one flat JSON object.
//!
//! Every key is optional and falls back to the default listed in
//! [`RunConfig::default`]; unknown keys are rejected with the offending line
//! and column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use skelex_core::planner::{KinematicLimits, ProximalParams};
use skelex_core::regions::{ProximityMetric, RegionParams};
use skelex_core::skeleton::GraphParams;

use crate::error::{Result, SimError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,

    /// Voxel edge length (m).
    pub voxel_size: f64,
    /// ESDF truncation distance (m).
    pub esdf_truncation: f64,
    /// Frontier cluster size cap in cells (F_max).
    pub frontier_max_cluster: usize,
    /// Frontier clusters smaller than this are ignored as targets.
    pub frontier_min_cluster: usize,

    /// Skeleton lattice downsampling factor (N).
    pub downsample: usize,
    /// Minimum distance between skeleton nodes (d_thr, m).
    pub d_thr: f64,
    /// Maximum edge length (d_conn, m).
    pub d_conn: f64,
    /// Minimum angle between edges at a node (theta_thr, deg).
    pub theta_thr_deg: f64,
    /// Clearance radius for edges and flight legs (r_edge, m).
    pub r_edge: f64,
    /// Frontier-to-node visibility range (d_vis, m).
    pub d_vis: f64,

    pub d_init: f64,
    pub d_max: f64,
    pub d_prox: f64,
    pub n_thr: u32,
    pub t_size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub layer_height: f64,
    pub proximity: ProximityMetric,

    /// Start nodes for the proximal search (k).
    pub k: usize,
    /// Hop limit for proximal candidates.
    pub max_hops: u32,
    pub tau_iso: f64,
    /// Secondary-target yaw blend weight (w).
    pub w: f64,
    /// Yaw samples per viewpoint (Y_s).
    pub y_s: usize,

    /// Per-axis horizontal speed limit (m/s).
    pub v_max: f64,
    pub a_max: f64,
    pub v_z_max: f64,
    /// Yaw rate limit (rad/s).
    pub omega_max: f64,

    /// Simulation step (s).
    pub dt: f64,
    /// Simulated-time budget (s).
    pub budget: f64,
    /// Time between depth scans (s).
    pub sense_period: f64,
    /// Viewpoint reached when closer than this (m).
    pub reach_tolerance: f64,
    /// and the heading error is below this (rad).
    pub yaw_tolerance: f64,
    /// Replan when the unknown volume has not shrunk for this long (s).
    pub watchdog: f64,
    /// Frontier cells are dropped after this many fruitless visits.
    pub blacklist_after: u32,
    /// Rotate once in place before the first plan.
    pub initial_spin: bool,
    /// Height climbed during the take-off turn (m); 0 turns in place.
    pub takeoff_climb: f64,
    /// Record every n-th simulation step in the trajectory.
    pub trajectory_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = GraphParams::default();
        let r = RegionParams::default();
        let p = ProximalParams::default();
        let l = KinematicLimits::default();
        Self {
            schema_version: SCHEMA_VERSION,
            voxel_size: 0.1,
            esdf_truncation: 5.0,
            frontier_max_cluster: 40,
            frontier_min_cluster: 4,
            downsample: g.downsample,
            d_thr: g.min_node_distance,
            d_conn: g.max_edge_length,
            theta_thr_deg: g.min_edge_angle.to_degrees(),
            r_edge: g.edge_clearance,
            d_vis: g.visibility_range,
            d_init: r.d_init,
            d_max: r.d_max,
            d_prox: r.d_prox,
            n_thr: r.n_thr,
            t_size: r.t_size,
            alpha: r.alpha,
            beta: r.beta,
            layer_height: r.layer_height,
            proximity: r.proximity,
            k: p.k_start,
            max_hops: p.max_hops,
            tau_iso: p.tau_iso,
            w: p.yaw_blend,
            y_s: p.yaw_samples,
            v_max: l.v_max,
            a_max: l.a_max,
            v_z_max: l.v_z_max,
            omega_max: l.omega_max,
            dt: 0.05,
            budget: 600.0,
            sense_period: 0.1,
            reach_tolerance: 0.3,
            yaw_tolerance: 0.2,
            watchdog: 4.0,
            blacklist_after: 2,
            initial_spin: true,
            takeoff_climb: 0.8,
            trajectory_stride: 1,
        }
    }
}

impl RunConfig {
    /// Parses a config, reporting unknown or mistyped keys with their position.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let positive = [
            ("voxel_size", self.voxel_size),
            ("esdf_truncation", self.esdf_truncation),
            ("dt", self.dt),
            ("budget", self.budget),
            ("sense_period", self.sense_period),
            ("reach_tolerance", self.reach_tolerance),
            ("yaw_tolerance", self.yaw_tolerance),
            ("watchdog", self.watchdog),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        if !(self.takeoff_climb >= 0.0 && self.takeoff_climb.is_finite()) {
            return Err(SimError::Config(format!(
                "`takeoff_climb` must be non-negative, got {}",
                self.takeoff_climb
            )));
        }
        let counts = [
            ("frontier_max_cluster", self.frontier_max_cluster),
            ("k", self.k),
            ("y_s", self.y_s),
            ("trajectory_stride", self.trajectory_stride),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(SimError::Config(format!("`{name}` must be at least 1")));
            }
        }
        if self.blacklist_after == 0 {
            return Err(SimError::Config("`blacklist_after` must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(SimError::Config(format!("`w` must lie in [0, 1], got {}", self.w)));
        }
        self.graph_params().validate().map_err(|e| SimError::Config(e.to_string()))?;
        self.region_params().validate().map_err(|e| SimError::Config(e.to_string()))?;
        self.limits().validate().map_err(|e| SimError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn graph_params(&self) -> GraphParams {
        GraphParams {
            downsample: self.downsample,
            min_node_distance: self.d_thr,
            max_edge_length: self.d_conn,
            min_edge_angle: self.theta_thr_deg.to_radians(),
            edge_clearance: self.r_edge,
            visibility_range: self.d_vis,
        }
    }

    pub fn region_params(&self) -> RegionParams {
        RegionParams {
            d_init: self.d_init,
            d_max: self.d_max,
            d_prox: self.d_prox,
            n_thr: self.n_thr,
            t_size: self.t_size,
            alpha: self.alpha,
            beta: self.beta,
            layer_height: self.layer_height,
            proximity: self.proximity,
        }
    }

    pub fn limits(&self) -> KinematicLimits {
        KinematicLimits {
            v_max: self.v_max,
            a_max: self.a_max,
            v_z_max: self.v_z_max,
            omega_max: self.omega_max,
        }
    }

    /// Proximal-planner parameters for a camera with the given field of view.
    pub fn proximal_params(&self, hfov: f64, vfov: f64, range: f64, use_pir: bool) -> ProximalParams {
        ProximalParams {
            k_start: self.k,
            start_radius: range,
            max_hops: self.max_hops,
            tau_iso: self.tau_iso,
            use_pir,
            yaw_blend: self.w,
            yaw_samples: self.y_s,
            hfov,
            vfov,
            sensor_range: range,
            clearance: self.r_edge,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let err = RunConfig::from_json("{\n  \"v_max\": 2.0,\n  \"vmax\": 3\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vmax"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn dump_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json_pretty()).unwrap(), cfg);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::from_json("{\"dt\": 0}").is_err());
        assert!(RunConfig::from_json("{\"schema_version\": 9}").is_err());
        assert!(RunConfig::from_json("{\"w\": 1.5}").is_err());
    }
}
