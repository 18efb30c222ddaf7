//! Proximal planner: nearby activated nodes costed by a kinematic time
//! model, with isolated-region prioritization and yaw refinement.

use serde::{Deserialize, Serialize};

use super::{KinematicLimits, UavState, Viewpoint};
use crate::error::{CoreError, Result};
use crate::geometry::{angle_between, bearing, wrap_angle, Vec3};
use crate::grid_map::{ClearanceProbe, FrontierCluster, VoxelGrid};
use crate::regions::RegionAnalysis;
use crate::skeleton::{NodeId, SkeletonGraph, SkeletonNode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximalParams {
    /// Number of start nodes near the UAV (k).
    pub k_start: usize,
    /// Search radius for start nodes (m), the sensor range by default.
    pub start_radius: f64,
    /// Candidates must be fewer than `max_hops + 1` edges from a start.
    pub max_hops: u32,
    /// Isolation score above which a candidate's region is prioritized.
    pub tau_iso: f64,
    pub use_pir: bool,
    /// Weight of the secondary-target bearing in the yaw blend (w).
    pub yaw_blend: f64,
    /// Yaw samples per viewpoint (Y_s).
    pub yaw_samples: usize,
    /// Camera field of view (rad).
    pub hfov: f64,
    pub vfov: f64,
    pub sensor_range: f64,
    /// Clearance radius for the UAV-to-start-node leg (m).
    pub clearance: f64,
}

impl Default for ProximalParams {
    fn default() -> Self {
        Self {
            k_start: 5,
            start_radius: 5.0,
            max_hops: 2,
            tau_iso: 0.7,
            use_pir: true,
            yaw_blend: 0.3,
            yaw_samples: 16,
            hfov: 115f64.to_radians(),
            vfov: 92f64.to_radians(),
            sensor_range: 5.0,
            clearance: 0.2,
        }
    }
}

/// The four additive terms of the position cost, in seconds, plus the path
/// length they were computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub length: f64,
    pub t_length: f64,
    pub t_init: f64,
    pub t_turns: f64,
    pub t_vertical: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateTarget {
    pub node: NodeId,
    pub viewpoint: Viewpoint,
    /// Nodes from the start node to the target, inclusive.
    pub node_path: Vec<NodeId>,
    pub cost: CostBreakdown,
    pub region: Option<usize>,
    pub s_iso: f64,
}

/// Everything one proximal planning call looked at.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProximalOutcome {
    pub starts: Vec<NodeId>,
    pub candidates: Vec<CandidateTarget>,
    /// Whether selection was restricted to isolated regions.
    pub pir_pool: bool,
    /// Index into `candidates`.
    pub chosen: Option<usize>,
}

impl ProximalOutcome {
    pub fn target(&self) -> Option<&CandidateTarget> {
        self.chosen.map(|i| &self.candidates[i])
    }
}

/// Time to realign a velocity whose component along the new direction is
/// `v_c`: `(v_max - |v_c|)^2 / (2 v_max a_max)`, plus `2 |v_c| / a_max` to
/// brake first when moving backwards. `|v_c|` is capped at `v_max`.
fn realign_time(v_c: f64, limits: &KinematicLimits) -> f64 {
    let v_c = v_c.clamp(-limits.v_max, limits.v_max);
    let a = v_c.abs();
    let mut t = (limits.v_max - a).powi(2) / (2.0 * limits.v_max * limits.a_max);
    if v_c < 0.0 {
        t += 2.0 * a / limits.a_max;
    }
    t
}

/// Time to turn the current velocity onto the unit direction `d0`.
pub fn initial_turn_time(velocity: &Vec3, d0: &Vec3, limits: &KinematicLimits) -> f64 {
    realign_time(velocity.dot(d0), limits)
}

/// Time cost of flying the polyline `path` (starting at the UAV position)
/// and climbing to `target_z`.
pub fn position_cost(
    state: &UavState,
    path: &[Vec3],
    target_z: f64,
    limits: &KinematicLimits,
) -> Result<CostBreakdown> {
    if path.is_empty() {
        return Err(CoreError::EmptyPath);
    }
    let segments: Vec<Vec3> = path
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|s| s.norm() > 1e-12)
        .collect();
    let length: f64 = segments.iter().map(|s| s.norm()).sum();
    let t_init = match segments.first() {
        Some(s) => initial_turn_time(&state.velocity, &s.normalize(), limits),
        None => 0.0,
    };
    let t_turns: f64 = segments
        .windows(2)
        .map(|w| realign_time(limits.v_max * angle_between(&w[0], &w[1]).cos(), limits))
        .sum();
    let t_length = length / limits.v_max;
    let t_vertical = (target_z - state.position.z).abs() / limits.v_z_max;
    Ok(CostBreakdown {
        length,
        t_length,
        t_init,
        t_turns,
        t_vertical,
        total: t_length + t_init + t_turns + t_vertical,
    })
}

/// Best yaw at the node for seeing its assigned frontier cells. `clusters`
/// must be sorted by id; assigned clusters missing from it are ignored.
pub fn viewpoint_for_node(
    node: &SkeletonNode,
    clusters: &[FrontierCluster],
    grid: &VoxelGrid,
    params: &ProximalParams,
) -> Option<Viewpoint> {
    let p = node.position;
    // bearings of cells passing range, elevation and occlusion tests;
    // None for cells straight above or below
    let mut visible: Vec<Option<f64>> = Vec::new();
    let mut sum = Vec3::zeros();
    let mut count = 0usize;
    for cid in &node.assigned_frontiers {
        let Ok(i) = clusters.binary_search_by_key(cid, |c| c.id) else {
            continue;
        };
        for &v in &clusters[i].cells {
            let c = grid.center(v);
            sum += c;
            count += 1;
            let d = c - p;
            let dist = d.norm();
            if dist > params.sensor_range {
                continue;
            }
            let horiz = (d.x * d.x + d.y * d.y).sqrt();
            if d.z.atan2(horiz).abs() > params.vfov / 2.0 {
                continue;
            }
            if !grid.line_of_sight(&p, &c) {
                continue;
            }
            visible.push((horiz > 1e-9).then(|| d.y.atan2(d.x)));
        }
    }
    if visible.is_empty() {
        return None;
    }
    let toward = bearing(&p, &(sum / count as f64));
    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..params.yaw_samples.max(1) {
        let yaw = wrap_angle(k as f64 * std::f64::consts::TAU / params.yaw_samples.max(1) as f64);
        let gain = visible
            .iter()
            .filter(|b| match b {
                Some(b) => wrap_angle(b - yaw).abs() <= params.hfov / 2.0,
                None => true,
            })
            .count();
        let dev = wrap_angle(yaw - toward).abs();
        let better = match best {
            None => true,
            Some((g, d, _)) => gain > g || (gain == g && dev < d - 1e-12),
        };
        if better {
            best = Some((gain, dev, yaw));
        }
    }
    let (gain, _, yaw) = best?;
    (gain > 0).then_some(Viewpoint {
        position: p,
        yaw,
        gain,
    })
}

/// Blends the viewpoint yaw toward the centroid of activated one-hop
/// neighbours of the target.
pub fn refine_yaw(primary: &CandidateTarget, graph: &SkeletonGraph, weight: f64) -> f64 {
    let yaw = primary.viewpoint.yaw;
    let Some(node) = graph.node(primary.node) else {
        return yaw;
    };
    let secondaries: Vec<Vec3> = graph
        .neighbors(node.id)
        .iter()
        .filter_map(|(m, _)| graph.node(*m).filter(|n| n.activated).map(|n| n.position))
        .collect();
    if secondaries.is_empty() {
        return yaw;
    }
    let centroid = secondaries.iter().sum::<Vec3>() / secondaries.len() as f64;
    if (centroid.xy() - node.position.xy()).norm() < 1e-9 {
        return yaw;
    }
    let b = bearing(&node.position, &centroid);
    let x = (1.0 - weight) * yaw.cos() + weight * b.cos();
    let y = (1.0 - weight) * yaw.sin() + weight * b.sin();
    y.atan2(x)
}

/// Start nodes: up to `k_start` nodes within `start_radius` of the UAV,
/// nearest first, reachable along a clear straight leg.
pub fn start_nodes(
    state: &UavState,
    graph: &SkeletonGraph,
    grid: &VoxelGrid,
    params: &ProximalParams,
) -> Vec<NodeId> {
    let probe = ClearanceProbe::new(params.clearance, grid.voxel_size());
    graph
        .nodes_within(&state.position, params.start_radius)
        .into_iter()
        .filter(|(id, _)| {
            let p = graph.node(*id).unwrap().position;
            probe.segment_clear(grid, &state.position, &p)
        })
        .take(params.k_start)
        .map(|(id, _)| id)
        .collect()
}

/// Searches activated nodes within the hop limit of the start nodes and
/// picks the cheapest, restricted to isolated regions when any qualify.
pub fn find_proximal_target(
    state: &UavState,
    graph: &SkeletonGraph,
    regions: &RegionAnalysis,
    clusters: &[FrontierCluster],
    grid: &VoxelGrid,
    limits: &KinematicLimits,
    params: &ProximalParams,
) -> ProximalOutcome {
    let starts = start_nodes(state, graph, grid, params);
    // best (cost, path) per target node, keyed by node id
    let mut best: std::collections::BTreeMap<NodeId, (CostBreakdown, Vec<NodeId>)> =
        std::collections::BTreeMap::new();
    for &s in &starts {
        let tree = graph.bfs(s, params.max_hops);
        for entry in &tree {
            let node = graph.node(entry.node).unwrap();
            if !node.activated {
                continue;
            }
            let Some(path) = SkeletonGraph::bfs_path(&tree, entry.node) else {
                continue;
            };
            let mut pts = vec![state.position];
            pts.extend(path.iter().map(|id| graph.node(*id).unwrap().position));
            let Ok(cost) = position_cost(state, &pts, node.position.z, limits) else {
                continue;
            };
            let replace = match best.get(&entry.node) {
                None => true,
                Some((c, _)) => cost.total < c.total,
            };
            if replace {
                best.insert(entry.node, (cost, path));
            }
        }
    }
    let mut candidates = Vec::new();
    for (id, (cost, path)) in best {
        let node = graph.node(id).unwrap();
        let Some(viewpoint) = viewpoint_for_node(node, clusters, grid, params) else {
            continue;
        };
        let region = regions.region_of(id);
        candidates.push(CandidateTarget {
            node: id,
            viewpoint,
            node_path: path,
            cost,
            region: region.map(|r| r.id),
            s_iso: region.map(|r| r.s_iso).unwrap_or(0.0),
        });
    }
    let pir_pool = params.use_pir && candidates.iter().any(|c| c.s_iso >= params.tau_iso);
    let mut chosen: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if pir_pool && c.s_iso < params.tau_iso {
            continue;
        }
        // candidates are in ascending node id, so strict < keeps the lower id
        if chosen.is_none_or(|j| c.cost.total < candidates[j].cost.total) {
            chosen = Some(i);
        }
    }
    ProximalOutcome {
        starts,
        candidates,
        pir_pool,
        chosen,
    }
}
