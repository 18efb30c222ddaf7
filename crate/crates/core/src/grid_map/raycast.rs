//! Front-to-back voxel traversal (Amanatides & Woo) and map raycasts.

use serde::{Deserialize, Serialize};

use super::{Occupancy, VoxelGrid, VoxelIndex};
use crate::error::{CoreError, Result};
use crate::geometry::Vec3;

/// One voxel visited by a [`VoxelWalk`], with the ray parameters (meters) at
/// which the ray enters and leaves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkStep {
    pub voxel: VoxelIndex,
    pub enter: f64,
    pub exit: f64,
}

/// Iterator over the voxels pierced by a ray, in order. Voxels entered at or
/// after `limit` are not produced. Ties between axes step the lowest axis
/// first, so traversal order is fully deterministic. Bounds are not checked.
#[derive(Clone, Debug)]
pub struct VoxelWalk {
    cur: [i32; 3],
    step: [i32; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
    t: f64,
    limit: f64,
}

impl VoxelWalk {
    /// `dir` must be unit length.
    pub fn new(grid: &VoxelGrid, origin: &Vec3, dir: &Vec3, limit: f64) -> Self {
        Self::from_parts(grid.origin(), grid.voxel_size(), origin, dir, limit)
    }

    /// Walk over an unbounded lattice of cubes of side `voxel_size` whose
    /// corner is at `grid_origin`.
    pub fn from_parts(grid_origin: Vec3, voxel_size: f64, origin: &Vec3, dir: &Vec3, limit: f64) -> Self {
        let vs = voxel_size;
        let rel = origin - grid_origin;
        let cur = [0, 1, 2].map(|a| (rel[a] / vs).floor() as i32);
        let mut step = [0; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            let d = dir[a];
            if d > 0.0 {
                step[a] = 1;
                t_delta[a] = vs / d;
                t_max[a] = ((cur[a] + 1) as f64 * vs - rel[a]) / d;
            } else if d < 0.0 {
                step[a] = -1;
                t_delta[a] = -vs / d;
                t_max[a] = (cur[a] as f64 * vs - rel[a]) / d;
            }
        }
        Self {
            cur,
            step,
            t_max,
            t_delta,
            t: 0.0,
            limit,
        }
    }
}

impl Iterator for VoxelWalk {
    type Item = WalkStep;

    fn next(&mut self) -> Option<WalkStep> {
        if self.t >= self.limit {
            return None;
        }
        let mut axis = 0;
        if self.t_max[1] < self.t_max[axis] {
            axis = 1;
        }
        if self.t_max[2] < self.t_max[axis] {
            axis = 2;
        }
        let exit = self.t_max[axis];
        let out = WalkStep {
            voxel: self.cur,
            enter: self.t,
            exit,
        };
        if exit.is_finite() {
            self.cur[axis] += self.step[axis];
            self.t = exit;
            self.t_max[axis] += self.t_delta[axis];
        } else {
            self.t = f64::INFINITY;
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayHit {
    Occupied,
    Unknown,
    MaxRange,
    MapBound,
}

/// How a map raycast treats Unknown voxels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayMode {
    /// Stop at the first Unknown voxel.
    KnownSpace,
    /// Pass through Unknown voxels; only Occupied voxels block.
    Transparent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayResult {
    pub kind: RayHit,
    pub point: Vec3,
    pub length: f64,
}

pub(super) fn raycast(
    grid: &VoxelGrid,
    origin: &Vec3,
    direction: &Vec3,
    max_range: f64,
    mode: RayMode,
) -> Result<RayResult> {
    let norm = direction.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(CoreError::ZeroDirection);
    }
    if !grid.contains_point(origin) {
        return Err(CoreError::OutOfBounds([origin.x, origin.y, origin.z]));
    }
    let dir = direction / norm;
    let finish = |kind, length: f64| RayResult {
        kind,
        point: origin + dir * length,
        length,
    };
    for step in VoxelWalk::new(grid, origin, &dir, max_range) {
        match grid.occupancy(step.voxel) {
            None => return Ok(finish(RayHit::MapBound, step.enter)),
            Some(Occupancy::Occupied) => return Ok(finish(RayHit::Occupied, step.enter)),
            Some(Occupancy::Unknown) if mode == RayMode::KnownSpace => {
                return Ok(finish(RayHit::Unknown, step.enter))
            }
            _ => {}
        }
    }
    Ok(finish(RayHit::MaxRange, max_range))
}
