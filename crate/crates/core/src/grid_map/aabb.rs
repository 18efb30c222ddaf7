use serde::{Deserialize, Serialize};

use super::VoxelIndex;

/// Inclusive voxel-index box. The empty box has `min > max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Aabb {
    pub min: VoxelIndex,
    pub max: VoxelIndex,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: [i32::MAX; 3],
        max: [i32::MIN; 3],
    };

    pub fn new(min: VoxelIndex, max: VoxelIndex) -> Self {
        Self { min, max }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.min[a] > self.max[a])
    }

    pub fn include(&mut self, v: VoxelIndex) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(v[a]);
            self.max[a] = self.max[a].max(v[a]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        let mut out = *self;
        out.include(other.min);
        out.include(other.max);
        out
    }

    pub fn padded(&self, pad: i32) -> Aabb {
        if self.is_empty() {
            return *self;
        }
        Aabb {
            min: [self.min[0] - pad, self.min[1] - pad, self.min[2] - pad],
            max: [self.max[0] + pad, self.max[1] + pad, self.max[2] + pad],
        }
    }

    /// Clips to `[0, dims)`; may become empty.
    pub fn clipped(&self, dims: [usize; 3]) -> Aabb {
        if self.is_empty() {
            return *self;
        }
        let mut out = *self;
        for a in 0..3 {
            out.min[a] = out.min[a].max(0);
            out.max[a] = out.max[a].min(dims[a] as i32 - 1);
        }
        if out.is_empty() {
            Aabb::EMPTY
        } else {
            out
        }
    }

    pub fn contains(&self, v: VoxelIndex) -> bool {
        (0..3).all(|a| v[a] >= self.min[a] && v[a] <= self.max[a])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && (0..3).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }

    pub fn extent(&self) -> [usize; 3] {
        if self.is_empty() {
            return [0; 3];
        }
        [
            (self.max[0] - self.min[0] + 1) as usize,
            (self.max[1] - self.min[1] + 1) as usize,
            (self.max[2] - self.min[2] + 1) as usize,
        ]
    }

    pub fn volume(&self) -> usize {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    /// Voxels in x-fastest order.
    pub fn iter(&self) -> impl Iterator<Item = VoxelIndex> + '_ {
        let b = *self;
        let empty = self.is_empty();
        let zs = if empty { 0..0 } else { b.min[2]..b.max[2] + 1 };
        zs.flat_map(move |z| {
            (b.min[1]..=b.max[1]).flat_map(move |y| (b.min[0]..=b.max[0]).map(move |x| [x, y, z]))
        })
    }
}
