//! Noiseless depth camera over the ground truth.
//!
//! Rays are laid out on a uniform azimuth/elevation lattice spanning the
//! field of view, endpoints included, and traced with the same voxel walk the
//! map uses for integration. A return is the distance at which the ray enters
//! its first solid voxel, so integrating a scan never marks a solid voxel
//! Free.

use serde::{Deserialize, Serialize};

use skelex_core::grid_map::{DepthReturn, VoxelWalk};
use skelex_core::Vec3;

use crate::env::GroundTruthEnv;
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    /// Horizontal field of view (deg).
    pub hfov_deg: f64,
    /// Vertical field of view (deg).
    pub vfov_deg: f64,
    /// Maximum range (m).
    pub max_range: f64,
    /// Rays across the horizontal field of view.
    pub rays_h: usize,
    /// Rays across the vertical field of view.
    pub rays_v: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            hfov_deg: 115.0,
            vfov_deg: 92.0,
            max_range: 5.0,
            rays_h: 64,
            rays_v: 48,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if !fov_ok(self.hfov_deg) || !fov_ok(self.vfov_deg) {
            return Err(SimError::Scenario(
                "sensor fields of view must lie in (0, 180) degrees".into(),
            ));
        }
        if !(self.max_range > 0.0) {
            return Err(SimError::Scenario("sensor max_range must be positive".into()));
        }
        if self.rays_h < 2 || self.rays_v < 2 {
            return Err(SimError::Scenario(
                "sensor needs at least 2 rays per axis".into(),
            ));
        }
        Ok(())
    }

    /// Unit ray directions in the body frame (x forward, z up), row-major
    /// from the lowest elevation.
    pub fn body_directions(&self) -> Vec<Vec3> {
        let h = self.hfov_deg.to_radians();
        let v = self.vfov_deg.to_radians();
        let mut out = Vec::with_capacity(self.rays_h * self.rays_v);
        for j in 0..self.rays_v {
            let el = -v / 2.0 + v * j as f64 / (self.rays_v - 1) as f64;
            for i in 0..self.rays_h {
                let az = -h / 2.0 + h * i as f64 / (self.rays_h - 1) as f64;
                out.push(Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()));
            }
        }
        out
    }
}

/// Depth camera with precomputed body-frame rays.
#[derive(Clone, Debug)]
pub struct DepthSensor {
    config: SensorConfig,
    rays: Vec<Vec3>,
}

impl DepthSensor {
    pub fn new(config: SensorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rays: config.body_directions(),
            config,
        })
    }

    pub fn config(&self) -> &SensorConfig {
        &self.config
    }

    /// Casts every ray from `position` with heading `yaw`.
    pub fn sense(&self, env: &GroundTruthEnv, position: &Vec3, yaw: f64) -> Result<Vec<DepthReturn>> {
        if env.solid_at(position) {
            return Err(SimError::PoseBlocked([position.x, position.y, position.z]));
        }
        let (s, c) = yaw.sin_cos();
        Ok(self
            .rays
            .iter()
            .map(|b| {
                let d = Vec3::new(c * b.x - s * b.y, s * b.x + c * b.y, b.z);
                DepthReturn {
                    direction: d,
                    range: first_hit(env, position, &d, self.config.max_range),
                }
            })
            .collect())
    }
}

/// Distance at which the ray enters its first solid voxel, if below `max_range`.
pub fn first_hit(env: &GroundTruthEnv, origin: &Vec3, dir: &Vec3, max_range: f64) -> Option<f64> {
    // the grid adapter only needs origin and voxel size, both shared with the env
    let walk = VoxelWalk::from_parts(Vec3::zeros(), env.voxel_size(), origin, dir, max_range);
    for step in walk {
        if env.is_solid(step.voxel) {
            return (step.enter < max_range).then_some(step.enter);
        }
    }
    None
}
