//! Binary grid snapshots.
//!
//! Layout (all little-endian):
//!
//! ```text
//! origin.x origin.y origin.z   f64 x 3
//! voxel_size                   f64
//! dims.x dims.y dims.z         u64 x 3
//! occupancy                    u8 per voxel (0 Unknown, 1 Free, 2 Occupied)
//! esdf                         f32 per voxel (-inf on non-Free voxels)
//! ```
//!
//! Voxels are ordered x-fastest, then y, then z. A JSON sidecar produced by
//! [`SnapshotHeader`] describes the same header for tooling.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Occupancy, VoxelGrid};
use crate::error::{CoreError, Result};
use crate::geometry::Vec3;

pub const HEADER_BYTES: usize = 7 * 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub origin: [f64; 3],
    pub voxel_size: f64,
    pub dims: [u64; 3],
    pub truncation: f64,
    pub header_bytes: usize,
    pub occupancy_encoding: String,
    pub esdf_encoding: String,
    pub order: String,
}

impl SnapshotHeader {
    pub fn for_grid(grid: &VoxelGrid) -> Self {
        let o = grid.origin();
        let d = grid.dims();
        Self {
            format: "voxel-snapshot/1".into(),
            origin: [o.x, o.y, o.z],
            voxel_size: grid.voxel_size(),
            dims: [d[0] as u64, d[1] as u64, d[2] as u64],
            truncation: grid.truncation(),
            header_bytes: HEADER_BYTES,
            occupancy_encoding: "u8: 0 unknown, 1 free, 2 occupied".into(),
            esdf_encoding: "f32 little-endian meters; -inf where not free".into(),
            order: "x fastest, then y, then z".into(),
        }
    }
}

pub fn write_snapshot<W: Write>(grid: &VoxelGrid, mut w: W) -> std::io::Result<()> {
    let o = grid.origin();
    for v in [o.x, o.y, o.z, grid.voxel_size()] {
        w.write_all(&v.to_le_bytes())?;
    }
    for d in grid.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let occ: Vec<u8> = grid.occupancy_slice().iter().map(|o| *o as u8).collect();
    w.write_all(&occ)?;
    let mut buf = Vec::with_capacity(grid.len() * 4);
    for e in grid.esdf_slice() {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Reads a snapshot back into a grid. The ESDF truncation is not part of the
/// binary layout and must be supplied (it is recorded in the sidecar).
pub fn read_snapshot<R: Read>(mut r: R, truncation: f64) -> Result<VoxelGrid> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| CoreError::Snapshot(e.to_string()))?;
    if bytes.len() < HEADER_BYTES {
        return Err(CoreError::Snapshot("truncated header".into()));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k * 8..k * 8 + 8].try_into().unwrap());
    let u = |k: usize| u64::from_le_bytes(bytes[k * 8..k * 8 + 8].try_into().unwrap()) as usize;
    let origin = Vec3::new(f(0), f(1), f(2));
    let dims = [u(4), u(5), u(6)];
    let mut grid = VoxelGrid::new(origin, f(3), dims, truncation)?;
    let n = grid.len();
    if bytes.len() != HEADER_BYTES + n * 5 {
        return Err(CoreError::Snapshot(format!(
            "expected {} bytes, found {}",
            HEADER_BYTES + n * 5,
            bytes.len()
        )));
    }
    for i in 0..n {
        let state = Occupancy::from_byte(bytes[HEADER_BYTES + i])
            .ok_or_else(|| CoreError::Snapshot(format!("bad occupancy byte at voxel {i}")))?;
        let v = grid.voxel_from_linear(i);
        grid.set_occupancy(v, state);
    }
    let base = HEADER_BYTES + n;
    for i in 0..n {
        let k = base + 4 * i;
        grid.esdf[i] = f32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    }
    Ok(grid)
}
