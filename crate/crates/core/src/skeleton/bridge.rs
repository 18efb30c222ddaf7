//! Graph repair: joins a position to the nearest of a set of nodes through
//! known free space when the skeleton offers no route.
//!
//! Straight edges between ESDF maxima cannot pass a doorway that is offset
//! from both room centers, which leaves the graph split into components. The
//! bridge searches the voxel map for a clear path, shortens it by line of
//! sight and inserts its corners as nodes joined by edges.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::{NodeId, SkeletonGraph};
use crate::geometry::Vec3;
use crate::grid_map::{Occupancy, VoxelGrid, VoxelIndex};

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Outcome of [`SkeletonGraph::bridge`].
#[derive(Clone, Debug, PartialEq)]
pub struct Bridge {
    /// Node path from the node at the start position to the reached target.
    pub path: Vec<NodeId>,
    pub added_nodes: Vec<NodeId>,
    pub added_edges: Vec<(NodeId, NodeId)>,
}

impl SkeletonGraph {
    /// Finds the shortest 26-connected path of clear Free voxels from `from`
    /// to the voxel of any node in `targets`, then inserts it into the graph.
    ///
    /// Corners are picked greedily: from each corner the farthest path voxel
    /// with a clear straight segment no longer than the connection range.
    /// Edges added here skip the angle test. Returns None when no target is
    /// reachable or the start voxel cannot hold a node.
    pub fn bridge(&mut self, grid: &VoxelGrid, from: &Vec3, targets: &[NodeId]) -> Option<Bridge> {
        let probe = self.probe(grid);
        let start = grid.voxel_of(from);
        let start_index = grid.linear(start)?;
        if grid.occupancy(start) != Some(Occupancy::Free) || !(grid.esdf(start)? > 0.0) {
            return None;
        }
        let mut goals: BTreeMap<usize, NodeId> = BTreeMap::new();
        for &t in targets {
            if let Some(node) = self.node(t) {
                if let Some(i) = grid.linear(node.voxel) {
                    goals.entry(i).or_insert(t);
                }
            }
        }
        if goals.is_empty() {
            return None;
        }

        // 0 unchecked, 1 clear, 2 blocked
        let mut clear = vec![0u8; grid.len()];
        let mut dist = vec![f64::INFINITY; grid.len()];
        let mut parent = vec![usize::MAX; grid.len()];
        let mut heap = BinaryHeap::new();
        dist[start_index] = 0.0;
        heap.push(Entry {
            cost: 0.0,
            index: start_index,
        });
        let vs = grid.voxel_size();
        let mut reached = None;
        while let Some(Entry { cost, index }) = heap.pop() {
            if cost > dist[index] {
                continue;
            }
            if let Some(&t) = goals.get(&index) {
                reached = Some((index, t));
                break;
            }
            let v = grid.voxel_from_linear(index);
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let w = [v[0] + dx, v[1] + dy, v[2] + dz];
                        let Some(wi) = grid.linear(w) else { continue };
                        if !goals.contains_key(&wi) {
                            if clear[wi] == 0 {
                                clear[wi] = if probe.voxel_clear(grid, w) { 1 } else { 2 };
                            }
                            if clear[wi] == 2 {
                                continue;
                            }
                        } else if grid.occupancy(w) != Some(Occupancy::Free) {
                            continue;
                        }
                        let step = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * vs;
                        let c = cost + step;
                        if c < dist[wi] {
                            dist[wi] = c;
                            parent[wi] = index;
                            heap.push(Entry { cost: c, index: wi });
                        }
                    }
                }
            }
        }
        let (end_index, target) = reached?;

        let mut voxels: Vec<VoxelIndex> = Vec::new();
        let mut i = end_index;
        while i != start_index {
            voxels.push(grid.voxel_from_linear(i));
            i = parent[i];
        }
        voxels.push(start);
        voxels.reverse();
        let n = voxels.len();
        let point = |k: usize| -> Vec3 {
            if k + 1 == n {
                self.node(target).unwrap().position
            } else {
                grid.center(voxels[k])
            }
        };

        let mut corners = vec![0usize];
        let mut at = 0usize;
        while at + 1 < n {
            let a = point(at);
            let mut next = at + 1;
            for k in (at + 2..n).rev() {
                let b = point(k);
                if (b - a).norm() <= self.params.max_edge_length && probe.segment_clear(grid, &a, &b) {
                    next = k;
                    break;
                }
            }
            corners.push(next);
            at = next;
        }

        let mut out = Bridge {
            path: Vec::new(),
            added_nodes: Vec::new(),
            added_edges: Vec::new(),
        };
        for (j, &k) in corners.iter().enumerate() {
            let id = if j + 1 == corners.len() {
                target
            } else {
                let v = voxels[k];
                let existing = self
                    .nodes_within(&grid.center(v), vs * 0.5)
                    .into_iter()
                    .map(|(id, _)| id)
                    .find(|id| self.node(*id).unwrap().voxel == v);
                match existing {
                    Some(id) => id,
                    None => {
                        let e = grid.esdf(v).filter(|e| *e > 0.0)?;
                        let id = self.insert_node(grid.center(v), v, e);
                        out.added_nodes.push(id);
                        id
                    }
                }
            };
            if let Some(&prev) = out.path.last() {
                if self.insert_edge(prev, id) {
                    out.added_edges.push((prev.min(id), prev.max(id)));
                }
            }
            out.path.push(id);
        }
        Some(out)
    }
}
