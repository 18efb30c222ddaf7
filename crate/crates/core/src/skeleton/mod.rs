//! Incremental free-space skeleton graph.
//!
//! Nodes are local ESDF maxima on a downsampled lattice, kept at least
//! `min_node_distance` apart. Edges join nodes within `max_edge_length` when
//! the straight segment has clearance and makes a wide enough angle with the
//! edges already present at both endpoints. Frontier clusters are attached
//! to their nearest visible node, which marks the node activated.

mod bridge;
mod distance;
mod update;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec3;
use crate::grid_map::frontier::ClusterId;
use crate::grid_map::{ClearanceProbe, VoxelIndex};

pub use bridge::Bridge;
pub use distance::BfsEntry;
pub use update::{ActivationDelta, GraphDelta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    /// Lattice downsampling factor in voxels (N).
    pub downsample: usize,
    /// Minimum distance between nodes (d_thr, m).
    pub min_node_distance: f64,
    /// Maximum edge length (d_conn, m).
    pub max_edge_length: f64,
    /// Minimum angle between edges sharing an endpoint (theta_thr, rad).
    pub min_edge_angle: f64,
    /// Clearance required along edges and at nodes (r_edge, m).
    pub edge_clearance: f64,
    /// Range of the frontier-to-node visibility test (d_vis, m).
    pub visibility_range: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            downsample: 3,
            min_node_distance: 0.6,
            max_edge_length: 2.5,
            min_edge_angle: 30f64.to_radians(),
            edge_clearance: 0.2,
            visibility_range: 5.0,
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(CoreError::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.downsample < 1 {
            return bad("downsample", "must be >= 1");
        }
        if !(self.min_node_distance > 0.0) {
            return bad("min_node_distance", "must be > 0");
        }
        if !(self.max_edge_length > self.min_node_distance) {
            return bad("max_edge_length", "must exceed min_node_distance");
        }
        if !(self.min_edge_angle > 0.0 && self.min_edge_angle < std::f64::consts::PI) {
            return bad("min_edge_angle", "must lie in (0, pi)");
        }
        if !(self.edge_clearance >= 0.0) {
            return bad("edge_clearance", "must be >= 0");
        }
        if !(self.visibility_range > 0.0) {
            return bad("visibility_range", "must be > 0");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonNode {
    pub id: NodeId,
    /// Center of the node's downsampled cell.
    pub position: Vec3,
    pub voxel: VoxelIndex,
    pub esdf: f32,
    pub activated: bool,
    pub assigned_frontiers: BTreeSet<ClusterId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
}

const BUCKET: f64 = 1.0;

fn bucket_of(p: &Vec3) -> [i32; 3] {
    [
        (p.x / BUCKET).floor() as i32,
        (p.y / BUCKET).floor() as i32,
        (p.z / BUCKET).floor() as i32,
    ]
}

#[derive(Clone, Debug)]
pub struct SkeletonGraph {
    params: GraphParams,
    clearance: Option<ClearanceProbe>,
    nodes: Vec<Option<SkeletonNode>>,
    /// neighbour lists sorted by id
    adjacency: Vec<Vec<(NodeId, f64)>>,
    buckets: HashMap<[i32; 3], Vec<NodeId>>,
    node_count: usize,
    edge_count: usize,
    orphans: Vec<ClusterId>,
}

impl SkeletonGraph {
    pub fn new(params: GraphParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            clearance: None,
            nodes: Vec::new(),
            adjacency: Vec::new(),
            buckets: HashMap::new(),
            node_count: 0,
            edge_count: 0,
            orphans: Vec::new(),
        })
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Upper bound (exclusive) on node id values, for dense per-node arrays.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&SkeletonNode> {
        self.nodes.get(id.0 as usize).and_then(|n| n.as_ref())
    }

    pub fn try_node(&self, id: NodeId) -> Result<&SkeletonNode> {
        self.node(id).ok_or(CoreError::UnknownNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    /// Live nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &SkeletonNode> {
        self.nodes.iter().filter_map(|n| n.as_ref())
    }

    pub fn activated_nodes(&self) -> impl Iterator<Item = &SkeletonNode> {
        self.nodes().filter(|n| n.activated)
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        self.adjacency
            .get(id.0 as usize)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.neighbors(id).len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search_by_key(&b, |e| e.0).is_ok()
    }

    /// All edges with `a < b`, ordered.
    pub fn edges(&self) -> Vec<SkeletonEdge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for n in self.nodes() {
            for &(m, length) in self.neighbors(n.id) {
                if n.id < m {
                    out.push(SkeletonEdge { a: n.id, b: m, length });
                }
            }
        }
        out
    }

    /// Clusters that found no visible node during the last assignment.
    pub fn orphans(&self) -> &[ClusterId] {
        &self.orphans
    }

    /// Nodes within `radius` of `p`, ordered by (distance, id).
    pub fn nodes_within(&self, p: &Vec3, radius: f64) -> Vec<(NodeId, f64)> {
        let lo = bucket_of(&(p - Vec3::repeat(radius)));
        let hi = bucket_of(&(p + Vec3::repeat(radius)));
        let mut out = Vec::new();
        for bz in lo[2]..=hi[2] {
            for by in lo[1]..=hi[1] {
                for bx in lo[0]..=hi[0] {
                    let Some(ids) = self.buckets.get(&[bx, by, bz]) else {
                        continue;
                    };
                    for id in ids {
                        let n = self.node(*id).unwrap();
                        let d = (n.position - p).norm();
                        if d <= radius {
                            out.push((*id, d));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Nearest node to `p` by Euclidean distance, ties to the lower id.
    pub fn nearest_node(&self, p: &Vec3) -> Option<NodeId> {
        let mut r = BUCKET;
        while r < 1e4 {
            if let Some(first) = self.nodes_within(p, r).first() {
                return Some(first.0);
            }
            if self.node_count == 0 {
                return None;
            }
            r *= 2.0;
        }
        self.nodes()
            .map(|n| (n.id, (n.position - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|x| x.0)
    }

    /// Inserts a node without any lattice checks. Used by the incremental
    /// update and by tests that script graphs directly.
    pub fn insert_node(&mut self, position: Vec3, voxel: VoxelIndex, esdf: f32) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Some(SkeletonNode {
            id,
            position,
            voxel,
            esdf,
            activated: false,
            assigned_frontiers: BTreeSet::new(),
        }));
        self.adjacency.push(Vec::new());
        self.buckets.entry(bucket_of(&position)).or_default().push(id);
        self.node_count += 1;
        id
    }

    /// Adds an undirected edge; returns false on self-loops, duplicates or
    /// unknown endpoints.
    pub fn insert_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b || !self.contains(a) || !self.contains(b) || self.has_edge(a, b) {
            return false;
        }
        let length = (self.node(a).unwrap().position - self.node(b).unwrap().position).norm();
        for (from, to) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[from.0 as usize];
            let pos = list.partition_point(|e| e.0 < to);
            list.insert(pos, (to, length));
        }
        self.edge_count += 1;
        true
    }

    pub fn remove_node(&mut self, id: NodeId) -> Option<SkeletonNode> {
        let node = self.nodes.get_mut(id.0 as usize)?.take()?;
        let neighbours = std::mem::take(&mut self.adjacency[id.0 as usize]);
        for (m, _) in &neighbours {
            self.adjacency[m.0 as usize].retain(|e| e.0 != id);
        }
        self.edge_count -= neighbours.len();
        if let Some(list) = self.buckets.get_mut(&bucket_of(&node.position)) {
            list.retain(|x| *x != id);
        }
        self.node_count -= 1;
        Some(node)
    }

    /// Sets node activation from an explicit assignment. Intended for tests.
    pub fn set_assignment(&mut self, id: NodeId, clusters: BTreeSet<ClusterId>) {
        if let Some(Some(n)) = self.nodes.get_mut(id.0 as usize) {
            n.activated = !clusters.is_empty();
            n.assigned_frontiers = clusters;
        }
    }

    pub fn to_export(&self) -> GraphExport {
        GraphExport {
            nodes: self
                .nodes()
                .map(|n| NodeExport {
                    id: n.id,
                    xyz: [n.position.x, n.position.y, n.position.z],
                    esdf: n.esdf,
                    activated: n.activated,
                })
                .collect(),
            edges: self.edges(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub id: NodeId,
    pub xyz: [f64; 3],
    pub esdf: f32,
    pub activated: bool,
}

/// JSON form of the graph: `{"nodes": [...], "edges": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<SkeletonEdge>,
}
