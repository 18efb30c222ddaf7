//! Incremental node extraction, edge wiring and frontier assignment.

use std::collections::BTreeSet;

use super::{NodeId, SkeletonGraph};
use crate::geometry::{angle_between, Vec3};
use crate::grid_map::{Aabb, ClearanceProbe, FrontierCluster, Occupancy, VoxelGrid, VoxelIndex};

/// Changes produced by one [`SkeletonGraph::update`] call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphDelta {
    pub added_nodes: Vec<NodeId>,
    pub removed_nodes: Vec<NodeId>,
    pub added_edges: Vec<(NodeId, NodeId)>,
    pub removed_edges: Vec<(NodeId, NodeId)>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.added_nodes.is_empty()
            && self.removed_nodes.is_empty()
            && self.added_edges.is_empty()
            && self.removed_edges.is_empty()
    }
}

/// Result of [`SkeletonGraph::assign_frontiers`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActivationDelta {
    pub activated: Vec<NodeId>,
    pub deactivated: Vec<NodeId>,
    pub orphans: Vec<u32>,
}

/// The downsampled lattice of a grid: cell `c` is represented by voxel
/// `c * n + n / 2` on every axis.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Lattice {
    n: i32,
    cells: [i32; 3],
}

impl Lattice {
    pub(crate) fn new(grid: &VoxelGrid, n: usize) -> Self {
        let n = n as i32;
        let dims = grid.dims();
        let mut cells = [0; 3];
        for a in 0..3 {
            let last = dims[a] as i32 - 1 - n / 2;
            cells[a] = if last < 0 { 0 } else { last / n + 1 };
        }
        Self { n, cells }
    }

    pub(crate) fn voxel(&self, c: [i32; 3]) -> VoxelIndex {
        [
            c[0] * self.n + self.n / 2,
            c[1] * self.n + self.n / 2,
            c[2] * self.n + self.n / 2,
        ]
    }

    fn contains(&self, c: [i32; 3]) -> bool {
        (0..3).all(|a| c[a] >= 0 && c[a] < self.cells[a])
    }

    /// Cells whose representative voxel lies inside `region`, as a box.
    fn cells_in(&self, region: &Aabb) -> Option<([i32; 3], [i32; 3])> {
        if region.is_empty() {
            return None;
        }
        let off = self.n / 2;
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            lo[a] = (region.min[a] - off + self.n - 1).div_euclid(self.n).max(0);
            hi[a] = (region.max[a] - off).div_euclid(self.n).min(self.cells[a] - 1);
            if lo[a] > hi[a] {
                return None;
            }
        }
        Some((lo, hi))
    }

    fn value(&self, grid: &VoxelGrid, c: [i32; 3]) -> f32 {
        if !self.contains(c) {
            return f32::NEG_INFINITY;
        }
        grid.esdf(self.voxel(c)).unwrap_or(f32::NEG_INFINITY)
    }

    /// Positive ESDF value at `c` that is at least every 26-neighbour's.
    pub(crate) fn is_local_max(&self, grid: &VoxelGrid, c: [i32; 3]) -> Option<f32> {
        let e = self.value(grid, c);
        if !(e > 0.0) {
            return None;
        }
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    if self.value(grid, [c[0] + dx, c[1] + dy, c[2] + dz]) > e {
                        return None;
                    }
                }
            }
        }
        Some(e)
    }
}

impl SkeletonGraph {
    pub(crate) fn probe(&mut self, grid: &VoxelGrid) -> ClearanceProbe {
        self.clearance
            .get_or_insert_with(|| ClearanceProbe::new(self.params.edge_clearance, grid.voxel_size()))
            .clone()
    }

    /// Updates the graph inside `dirty`, the box where the ESDF changed.
    ///
    /// Removes nodes whose voxel is no longer Free, adds lattice local maxima
    /// that are clear of obstacles and far enough from existing nodes (greedy
    /// in ascending cell order), and wires new or isolated nodes in `dirty`.
    pub fn update(&mut self, grid: &VoxelGrid, dirty: &Aabb) -> GraphDelta {
        let probe = self.probe(grid);
        let mut delta = GraphDelta::default();
        let region = dirty.clipped(grid.dims());

        let in_dirty: Vec<NodeId> = self
            .nodes()
            .filter(|n| region.contains(n.voxel))
            .map(|n| n.id)
            .collect();
        for id in &in_dirty {
            let voxel = self.node(*id).unwrap().voxel;
            match grid.esdf(voxel) {
                Some(e) if grid.occupancy(voxel) == Some(Occupancy::Free) && e > 0.0 => {
                    self.nodes[id.0 as usize].as_mut().unwrap().esdf = e;
                }
                _ => {
                    for &(m, _) in self.neighbors(*id) {
                        delta.removed_edges.push(((*id).min(m), (*id).max(m)));
                    }
                    self.remove_node(*id);
                    delta.removed_nodes.push(*id);
                }
            }
        }

        let lattice = Lattice::new(grid, self.params.downsample);
        if let Some((lo, hi)) = lattice.cells_in(&region) {
            for cz in lo[2]..=hi[2] {
                for cy in lo[1]..=hi[1] {
                    for cx in lo[0]..=hi[0] {
                        let c = [cx, cy, cz];
                        let Some(e) = lattice.is_local_max(grid, c) else {
                            continue;
                        };
                        let voxel = lattice.voxel(c);
                        if !probe.voxel_clear(grid, voxel) {
                            continue;
                        }
                        let p = grid.center(voxel);
                        if self.too_close(&p) {
                            continue;
                        }
                        delta.added_nodes.push(self.insert_node(p, voxel, e));
                    }
                }
            }
        }

        let mut to_wire = delta.added_nodes.clone();
        to_wire.extend(
            self.nodes()
                .filter(|n| region.contains(n.voxel) && self.degree(n.id) == 0)
                .map(|n| n.id),
        );
        to_wire.sort_unstable();
        to_wire.dedup();
        delta.added_edges = self.wire(grid, &probe, &to_wire);
        delta
    }

    fn too_close(&self, p: &Vec3) -> bool {
        let d_thr = self.params.min_node_distance;
        self.nodes_within(p, d_thr)
            .iter()
            .any(|(_, d)| *d < d_thr - 1e-9)
    }

    /// Connects each node in `ids` (in order) to partners within the
    /// connection range, nearest first.
    pub fn connect_edges(&mut self, grid: &VoxelGrid, ids: &[NodeId]) -> Vec<(NodeId, NodeId)> {
        let probe = self.probe(grid);
        self.wire(grid, &probe, ids)
    }

    fn wire(
        &mut self,
        grid: &VoxelGrid,
        probe: &ClearanceProbe,
        ids: &[NodeId],
    ) -> Vec<(NodeId, NodeId)> {
        let mut added = Vec::new();
        for &a in ids {
            let Some(node) = self.node(a) else { continue };
            let pa = node.position;
            for (b, _) in self.nodes_within(&pa, self.params.max_edge_length) {
                if b == a || self.has_edge(a, b) {
                    continue;
                }
                let pb = self.node(b).unwrap().position;
                if !self.angle_ok(a, &pa, &pb) || !self.angle_ok(b, &pb, &pa) {
                    continue;
                }
                if !probe.segment_clear(grid, &pa, &pb) {
                    continue;
                }
                self.insert_edge(a, b);
                added.push((a.min(b), a.max(b)));
            }
        }
        added
    }

    /// The direction `from -> to` keeps at least the minimum angle to every
    /// edge already incident to `at`.
    fn angle_ok(&self, at: NodeId, from: &Vec3, to: &Vec3) -> bool {
        let dir = to - from;
        self.neighbors(at).iter().all(|(m, _)| {
            let other = self.node(*m).unwrap().position - from;
            angle_between(&dir, &other) >= self.params.min_edge_angle - 1e-12
        })
    }

    /// Assigns every cluster to its nearest node with line of sight to the
    /// cluster centroid within the visibility range, then sets activation.
    pub fn assign_frontiers<'a>(
        &mut self,
        clusters: impl IntoIterator<Item = &'a FrontierCluster>,
        grid: &VoxelGrid,
    ) -> ActivationDelta {
        let mut assignment: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.nodes.len()];
        let mut orphans = Vec::new();
        for cluster in clusters {
            let c = cluster.centroid();
            let found = self
                .nodes_within(&c, self.params.visibility_range)
                .into_iter()
                .find(|(id, _)| grid.line_of_sight(&self.node(*id).unwrap().position, &c));
            match found {
                Some((id, _)) => {
                    assignment[id.0 as usize].insert(cluster.id);
                }
                None => orphans.push(cluster.id),
            }
        }
        let mut delta = ActivationDelta::default();
        for (slot, assigned) in self.nodes.iter_mut().zip(assignment) {
            let Some(node) = slot.as_mut() else { continue };
            let active = !assigned.is_empty();
            if active && !node.activated {
                delta.activated.push(node.id);
            } else if !active && node.activated {
                delta.deactivated.push(node.id);
            }
            node.activated = active;
            node.assigned_frontiers = assigned;
        }
        self.orphans = orphans.clone();
        delta.orphans = orphans;
        delta
    }
}
