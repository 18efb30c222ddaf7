//! Frontier cells and their clusters.
//!
//! A frontier cell is a Free voxel with at least one Unknown face neighbour.
//! Clusters are 26-connected groups of frontier cells, split by k-means until
//! no cluster exceeds the size cap. Updates are local: only clusters touching
//! the dirty box (padded by one voxel) are dissolved and regrown, every other
//! cluster keeps its id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Aabb, Occupancy, VoxelGrid, VoxelIndex, FACE_OFFSETS};
use crate::geometry::Vec3;
use crate::kmeans::{split_by_size, KMeansInit};

pub type ClusterId = u32;

const NO_CLUSTER: u32 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierCluster {
    pub id: ClusterId,
    pub cells: Vec<VoxelIndex>,
    pub centroid: [f64; 3],
    pub bbox: Aabb,
}

impl FrontierCluster {
    pub fn centroid(&self) -> Vec3 {
        Vec3::from(self.centroid)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Whether voxel `v` is a frontier cell of `grid`.
pub fn is_frontier_cell(grid: &VoxelGrid, v: VoxelIndex) -> bool {
    grid.occupancy(v) == Some(Occupancy::Free)
        && FACE_OFFSETS.iter().any(|o| {
            grid.occupancy([v[0] + o[0], v[1] + o[1], v[2] + o[2]]) == Some(Occupancy::Unknown)
        })
}

/// Incrementally maintained frontier state for one grid.
#[derive(Clone, Debug)]
pub struct FrontierMap {
    max_cluster_size: usize,
    is_frontier: Vec<bool>,
    /// cluster id per voxel, 0 when unassigned
    owner: Vec<u32>,
    clusters: BTreeMap<ClusterId, FrontierCluster>,
    next_id: ClusterId,
}

impl FrontierMap {
    pub fn new(grid: &VoxelGrid, max_cluster_size: usize) -> Self {
        Self {
            max_cluster_size: max_cluster_size.max(1),
            is_frontier: vec![false; grid.len()],
            owner: vec![NO_CLUSTER; grid.len()],
            clusters: BTreeMap::new(),
            next_id: 1,
        }
    }

    pub fn clusters(&self) -> impl Iterator<Item = &FrontierCluster> {
        self.clusters.values()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&FrontierCluster> {
        self.clusters.get(&id)
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_frontier(&self, grid: &VoxelGrid, v: VoxelIndex) -> bool {
        grid.linear(v).is_some_and(|i| self.is_frontier[i])
    }

    pub fn frontier_cell_count(&self) -> usize {
        self.is_frontier.iter().filter(|f| **f).count()
    }

    /// Cluster owning voxel `v`, if any.
    pub fn owner_of(&self, grid: &VoxelGrid, v: VoxelIndex) -> Option<ClusterId> {
        let i = grid.linear(v)?;
        (self.owner[i] != NO_CLUSTER).then_some(self.owner[i])
    }

    /// Updates frontier cells and clusters around `dirty`; returns all current
    /// clusters ordered by id.
    pub fn detect(&mut self, grid: &VoxelGrid, dirty: &Aabb) -> Vec<FrontierCluster> {
        if !dirty.is_empty() {
            self.update(grid, dirty);
        }
        self.clusters.values().cloned().collect()
    }

    fn update(&mut self, grid: &VoxelGrid, dirty: &Aabb) {
        let region = dirty.padded(1).clipped(grid.dims());
        if region.is_empty() {
            return;
        }
        // dissolve clusters with a cell inside the region
        let touched: Vec<ClusterId> = self
            .clusters
            .values()
            .filter(|c| c.bbox.intersects(&region) && c.cells.iter().any(|v| region.contains(*v)))
            .map(|c| c.id)
            .collect();
        let mut seeds: Vec<usize> = Vec::new();
        for id in touched {
            let c = self.clusters.remove(&id).unwrap();
            for v in c.cells {
                let i = grid.linear_unchecked(v);
                self.owner[i] = NO_CLUSTER;
                seeds.push(i);
            }
        }
        for v in region.iter() {
            let i = grid.linear_unchecked(v);
            let f = is_frontier_cell(grid, v);
            self.is_frontier[i] = f;
            if f {
                seeds.push(i);
            }
        }
        seeds.sort_unstable();
        seeds.dedup();

        let mut stack = Vec::new();
        for &seed in &seeds {
            if !self.is_frontier[seed] || self.owner[seed] != NO_CLUSTER {
                continue;
            }
            // temporary marker while growing
            const GROWING: u32 = u32::MAX;
            let mut cells = vec![seed];
            self.owner[seed] = GROWING;
            stack.push(seed);
            while let Some(i) = stack.pop() {
                let v = grid.voxel_from_linear(i);
                for dz in -1..=1 {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            let Some(j) = grid.linear([v[0] + dx, v[1] + dy, v[2] + dz]) else {
                                continue;
                            };
                            if self.is_frontier[j] && self.owner[j] == NO_CLUSTER {
                                self.owner[j] = GROWING;
                                cells.push(j);
                                stack.push(j);
                            }
                        }
                    }
                }
            }
            cells.sort_unstable();
            self.emit(grid, cells);
        }
    }

    fn emit(&mut self, grid: &VoxelGrid, cells: Vec<usize>) {
        let groups: Vec<Vec<usize>> = if cells.len() > self.max_cluster_size {
            let pts: Vec<Vec3> = cells
                .iter()
                .map(|&i| grid.center(grid.voxel_from_linear(i)))
                .collect();
            split_by_size(&pts, self.max_cluster_size, 20, KMeansInit::FarthestPoint)
                .into_iter()
                .map(|g| g.into_iter().map(|k| cells[k]).collect())
                .collect()
        } else {
            vec![cells]
        };
        for group in groups {
            let id = self.next_id;
            self.next_id += 1;
            let mut bbox = Aabb::EMPTY;
            let mut sum = Vec3::zeros();
            let mut voxels = Vec::with_capacity(group.len());
            for &i in &group {
                self.owner[i] = id;
                let v = grid.voxel_from_linear(i);
                bbox.include(v);
                sum += grid.center(v);
                voxels.push(v);
            }
            let centroid = sum / group.len() as f64;
            self.clusters.insert(
                id,
                FrontierCluster {
                    id,
                    cells: voxels,
                    centroid: [centroid.x, centroid.y, centroid.z],
                    bbox,
                },
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with(dims: [usize; 3], f: impl Fn(VoxelIndex) -> Occupancy) -> VoxelGrid {
        let mut g = VoxelGrid::new(Vec3::zeros(), 0.1, dims, 5.0).unwrap();
        for i in 0..g.len() {
            let v = g.voxel_from_linear(i);
            g.set_occupancy(v, f(v));
        }
        g
    }

    #[test]
    fn fully_known_map_has_no_frontier() {
        let g = grid_with([8, 8, 8], |v| {
            if v[0] == 0 {
                Occupancy::Occupied
            } else {
                Occupancy::Free
            }
        });
        let mut fm = FrontierMap::new(&g, 40);
        assert!(fm.detect(&g, &g.full_aabb()).is_empty());
    }

    #[test]
    fn free_line_against_unknown_half_space() {
        // a 10-cell free line at y = 0 with unknown everywhere else
        let g = grid_with([10, 4, 1], |v| {
            if v[1] == 0 {
                Occupancy::Free
            } else {
                Occupancy::Unknown
            }
        });
        let mut fm = FrontierMap::new(&g, 40);
        let clusters = fm.detect(&g, &g.full_aabb());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].len(), 10);
        let c = clusters[0].centroid();
        assert!((c.x - 0.5).abs() < 1e-12);
        assert!((c.y - 0.05).abs() < 1e-12);
    }

    #[test]
    fn oversized_cluster_is_split() {
        let g = grid_with([30, 30, 2], |v| {
            if v[2] == 0 {
                Occupancy::Free
            } else {
                Occupancy::Unknown
            }
        });
        let mut fm = FrontierMap::new(&g, 40);
        let clusters = fm.detect(&g, &g.full_aabb());
        assert!(clusters.len() >= 900usize.div_ceil(40));
        assert!(clusters.iter().all(|c| c.len() <= 40));
        assert_eq!(clusters.iter().map(|c| c.len()).sum::<usize>(), 900);
    }

    #[test]
    fn untouched_clusters_keep_ids() {
        let mut g = grid_with([40, 4, 1], |v| {
            if v[1] == 0 && (v[0] < 5 || v[0] > 34) {
                Occupancy::Free
            } else {
                Occupancy::Unknown
            }
        });
        let mut fm = FrontierMap::new(&g, 40);
        let before = fm.detect(&g, &g.full_aabb());
        assert_eq!(before.len(), 2);
        g.set_occupancy([2, 1, 0], Occupancy::Free);
        let dirty = Aabb::new([2, 1, 0], [2, 1, 0]);
        let after = fm.detect(&g, &dirty);
        assert_eq!(after.len(), 2);
        let far_before = before.iter().find(|c| c.cells[0][0] > 30).unwrap();
        let far_after = after.iter().find(|c| c.cells[0][0] > 30).unwrap();
        assert_eq!(far_before.id, far_after.id);
        let near_after = after.iter().find(|c| c.cells[0][0] < 30).unwrap();
        assert_ne!(near_after.id, before.iter().find(|c| c.cells[0][0] < 30).unwrap().id);
    }
}
