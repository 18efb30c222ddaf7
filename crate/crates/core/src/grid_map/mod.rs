//! Online tri-state occupancy map with a truncated ESDF.
//!
//! The map is deterministic: a voxel is Free once a ray passed through it and
//! Occupied once a ray ended in it. Unknown voxels are outside the ESDF domain
//! and carry [`INVALID_ESDF`].

mod aabb;
pub mod esdf;
pub mod frontier;
pub mod raycast;
pub mod snapshot;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec3;

pub use aabb::Aabb;
pub use frontier::{FrontierCluster, FrontierMap};
pub use raycast::{RayHit, RayMode, RayResult, VoxelWalk};

/// Integer voxel coordinates. Signed so that out-of-bounds neighbours can be
/// represented without wrapping.
pub type VoxelIndex = [i32; 3];

/// ESDF value stored on every non-Free voxel.
pub const INVALID_ESDF: f32 = f32::NEG_INFINITY;

/// The six face neighbours.
pub const FACE_OFFSETS: [[i32; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Occupancy {
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl Occupancy {
    pub fn is_known(self) -> bool {
        self != Occupancy::Unknown
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Occupancy::Unknown),
            1 => Some(Occupancy::Free),
            2 => Some(Occupancy::Occupied),
            _ => None,
        }
    }
}

/// A single depth-camera return expressed as a unit direction and an optional
/// range. `None` means nothing was hit within the sensor range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthReturn {
    pub direction: Vec3,
    pub range: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct VoxelGrid {
    origin: Vec3,
    voxel_size: f64,
    dims: [usize; 3],
    truncation: f64,
    occupancy: Vec<Occupancy>,
    esdf: Vec<f32>,
    unknown_count: usize,
    edt_scratch: Vec<f64>,
}

impl VoxelGrid {
    /// Creates an all-Unknown grid. `truncation` is the ESDF cap in meters.
    pub fn new(origin: Vec3, voxel_size: f64, dims: [usize; 3], truncation: f64) -> Result<Self> {
        if !(voxel_size > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "voxel_size",
                reason: format!("must be positive, got {voxel_size}"),
            });
        }
        if dims.contains(&0) {
            return Err(CoreError::InvalidParameter {
                name: "dims",
                reason: format!("every axis needs at least one voxel, got {dims:?}"),
            });
        }
        if !(truncation > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "esdf_truncation",
                reason: format!("must be positive, got {truncation}"),
            });
        }
        let n = dims[0] * dims[1] * dims[2];
        Ok(Self {
            origin,
            voxel_size,
            dims,
            truncation,
            occupancy: vec![Occupancy::Unknown; n],
            esdf: vec![INVALID_ESDF; n],
            unknown_count: n,
            edt_scratch: Vec::new(),
        })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    /// ESDF padding in voxels: ceil(truncation / voxel_size).
    pub fn esdf_padding(&self) -> i32 {
        (self.truncation / self.voxel_size - 1e-9).ceil() as i32
    }

    pub fn full_aabb(&self) -> Aabb {
        Aabb::new(
            [0, 0, 0],
            [
                self.dims[0] as i32 - 1,
                self.dims[1] as i32 - 1,
                self.dims[2] as i32 - 1,
            ],
        )
    }

    pub fn in_bounds(&self, v: VoxelIndex) -> bool {
        v[0] >= 0
            && v[1] >= 0
            && v[2] >= 0
            && (v[0] as usize) < self.dims[0]
            && (v[1] as usize) < self.dims[1]
            && (v[2] as usize) < self.dims[2]
    }

    pub fn linear(&self, v: VoxelIndex) -> Option<usize> {
        if self.in_bounds(v) {
            Some(self.linear_unchecked(v))
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn linear_unchecked(&self, v: VoxelIndex) -> usize {
        v[0] as usize + self.dims[0] * (v[1] as usize + self.dims[1] * v[2] as usize)
    }

    pub fn voxel_from_linear(&self, i: usize) -> VoxelIndex {
        let x = i % self.dims[0];
        let y = (i / self.dims[0]) % self.dims[1];
        let z = i / (self.dims[0] * self.dims[1]);
        [x as i32, y as i32, z as i32]
    }

    /// Voxel containing a world position (may be out of bounds).
    pub fn voxel_of(&self, p: &Vec3) -> VoxelIndex {
        let r = (p - self.origin) / self.voxel_size;
        [r.x.floor() as i32, r.y.floor() as i32, r.z.floor() as i32]
    }

    pub fn center(&self, v: VoxelIndex) -> Vec3 {
        self.origin
            + Vec3::new(
                (v[0] as f64 + 0.5) * self.voxel_size,
                (v[1] as f64 + 0.5) * self.voxel_size,
                (v[2] as f64 + 0.5) * self.voxel_size,
            )
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        self.in_bounds(self.voxel_of(p))
    }

    /// Occupancy of a voxel, `None` outside the map.
    pub fn occupancy(&self, v: VoxelIndex) -> Option<Occupancy> {
        self.linear(v).map(|i| self.occupancy[i])
    }

    pub fn occupancy_at(&self, p: &Vec3) -> Option<Occupancy> {
        self.occupancy(self.voxel_of(p))
    }

    pub fn occupancy_slice(&self) -> &[Occupancy] {
        &self.occupancy
    }

    /// ESDF value of a voxel; `None` outside the map or on non-Free voxels.
    pub fn esdf(&self, v: VoxelIndex) -> Option<f32> {
        let i = self.linear(v)?;
        let d = self.esdf[i];
        (d != INVALID_ESDF).then_some(d)
    }

    pub fn esdf_slice(&self) -> &[f32] {
        &self.esdf
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown_count
    }

    pub fn known_count(&self) -> usize {
        self.len() - self.unknown_count
    }

    /// Sets a voxel's state directly. Intended for tests and scripted maps;
    /// the ESDF is not touched.
    pub fn set_occupancy(&mut self, v: VoxelIndex, state: Occupancy) -> bool {
        let Some(i) = self.linear(v) else {
            return false;
        };
        self.write(i, state)
    }

    fn write(&mut self, i: usize, state: Occupancy) -> bool {
        let old = self.occupancy[i];
        if old == state {
            return false;
        }
        if old == Occupancy::Unknown {
            self.unknown_count -= 1;
        } else if state == Occupancy::Unknown {
            self.unknown_count += 1;
        }
        self.occupancy[i] = state;
        true
    }

    /// Integrates one depth scan taken from `origin`.
    ///
    /// Voxels traversed before the return are marked Free, the voxel holding
    /// the return is marked Occupied, and rays without a return clear space up
    /// to `max_range`. Returns the tight box of voxels whose state changed.
    pub fn integrate_scan(
        &mut self,
        origin: &Vec3,
        returns: &[DepthReturn],
        max_range: f64,
    ) -> Result<Aabb> {
        if !self.contains_point(origin) {
            return Err(CoreError::OutOfBounds([origin.x, origin.y, origin.z]));
        }
        let mut hits: Vec<usize> = Vec::new();
        let mut frees: Vec<usize> = Vec::new();
        for ret in returns {
            let norm = ret.direction.norm();
            if norm == 0.0 {
                continue;
            }
            let dir = ret.direction / norm;
            let range = ret.range.filter(|r| *r <= max_range);
            let limit = range.unwrap_or(max_range);
            for step in VoxelWalk::new(self, origin, &dir, limit + self.voxel_size) {
                let Some(i) = self.linear(step.voxel) else {
                    break;
                };
                match range {
                    Some(r) if step.exit > r || step.enter >= r => {
                        hits.push(i);
                        break;
                    }
                    None if step.enter >= max_range => break,
                    _ => frees.push(i),
                }
            }
        }
        hits.sort_unstable();
        hits.dedup();
        let mut changed = Aabb::EMPTY;
        for &i in &frees {
            if hits.binary_search(&i).is_ok() {
                continue;
            }
            if self.write(i, Occupancy::Free) {
                changed.include(self.voxel_from_linear(i));
            }
        }
        for &i in &hits {
            if self.write(i, Occupancy::Occupied) {
                changed.include(self.voxel_from_linear(i));
            }
        }
        Ok(changed)
    }

    /// Map-based raycast. See [`RayMode`] for how Unknown voxels are treated.
    pub fn raycast(
        &self,
        origin: &Vec3,
        direction: &Vec3,
        max_range: f64,
        mode: RayMode,
    ) -> Result<RayResult> {
        raycast::raycast(self, origin, direction, max_range, mode)
    }

    /// True when no Occupied voxel lies strictly between `from` and `to`.
    /// Unknown voxels are transparent and the voxel holding `to` is ignored.
    pub fn line_of_sight(&self, from: &Vec3, to: &Vec3) -> bool {
        let delta = to - from;
        let len = delta.norm();
        if len == 0.0 {
            return true;
        }
        let target = self.voxel_of(to);
        for step in VoxelWalk::new(self, from, &(delta / len), len) {
            if step.voxel == target {
                return true;
            }
            match self.occupancy(step.voxel) {
                Some(Occupancy::Occupied) => return false,
                None => return false,
                _ => {}
            }
        }
        true
    }
}

/// Precomputed ball of voxel offsets used for clearance checks: a voxel is
/// clear when every voxel whose center lies closer than `radius` is known Free.
#[derive(Clone, Debug)]
pub struct ClearanceProbe {
    offsets: Vec<[i32; 3]>,
    radius: f64,
}

impl ClearanceProbe {
    pub fn new(radius: f64, voxel_size: f64) -> Self {
        let r = (radius / voxel_size).ceil() as i32;
        let mut offsets = Vec::new();
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    let d = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * voxel_size;
                    if d < radius - 1e-9 || (dx == 0 && dy == 0 && dz == 0) {
                        offsets.push([dx, dy, dz]);
                    }
                }
            }
        }
        Self { offsets, radius }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn voxel_clear(&self, grid: &VoxelGrid, v: VoxelIndex) -> bool {
        self.offsets.iter().all(|o| {
            grid.occupancy([v[0] + o[0], v[1] + o[1], v[2] + o[2]]) == Some(Occupancy::Free)
        })
    }

    pub fn point_clear(&self, grid: &VoxelGrid, p: &Vec3) -> bool {
        self.voxel_clear(grid, grid.voxel_of(p))
    }

    /// Every voxel traversed by the straight segment `a -> b` is clear.
    pub fn segment_clear(&self, grid: &VoxelGrid, a: &Vec3, b: &Vec3) -> bool {
        let delta = b - a;
        let len = delta.norm();
        if len == 0.0 {
            return self.point_clear(grid, a);
        }
        let end = grid.voxel_of(b);
        for step in VoxelWalk::new(grid, a, &(delta / len), len) {
            if !self.voxel_clear(grid, step.voxel) {
                return false;
            }
            if step.voxel == end {
                break;
            }
        }
        self.voxel_clear(grid, end)
    }
}
