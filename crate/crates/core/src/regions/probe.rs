//! Depth probes into unknown space.

use super::{Probe, RegionParams};
use crate::geometry::Vec3;
use crate::grid_map::{FrontierCluster, Occupancy, VoxelGrid, VoxelWalk};
use crate::skeleton::{NodeId, SkeletonGraph};

/// Number of probe directions per fan.
pub const AZIMUTHS: usize = 8;

/// Casts one horizontal probe from `origin` at azimuth index `k`.
///
/// The probe is invalid when it meets an Occupied voxel or the map bound
/// before reaching Unknown space, or when Unknown space starts farther than
/// `d_init`. Otherwise depth runs from the first Unknown voxel to the first
/// known voxel, the map bound or `d_max`, whichever comes first.
pub fn cast_probe(
    grid: &VoxelGrid,
    owner: NodeId,
    cluster: u32,
    origin: &Vec3,
    k: u8,
    params: &RegionParams,
) -> Probe {
    let angle = k as f64 * std::f64::consts::FRAC_PI_4;
    let dir = Vec3::new(angle.cos(), angle.sin(), 0.0);
    let at = |t: f64| {
        let p = origin + dir * t;
        [p.x, p.y, p.z]
    };
    let mut probe = Probe {
        owner,
        cluster,
        origin: [origin.x, origin.y, origin.z],
        azimuth: k,
        layer_z: origin.z,
        entry: None,
        termination: None,
        depth: None,
    };
    let limit = params.d_init + params.d_max + 2.0 * grid.voxel_size();
    let mut entry: Option<f64> = None;
    let mut end: Option<f64> = None;
    for step in VoxelWalk::new(grid, origin, &dir, limit) {
        let state = grid.occupancy(step.voxel);
        match entry {
            None => match state {
                None | Some(Occupancy::Occupied) => return probe,
                _ if step.enter > params.d_init => return probe,
                Some(Occupancy::Unknown) => entry = Some(step.enter),
                Some(Occupancy::Free) => {}
            },
            Some(t0) => {
                if step.enter - t0 >= params.d_max {
                    end = Some(t0 + params.d_max);
                    break;
                }
                match state {
                    Some(Occupancy::Unknown) => {}
                    _ => {
                        end = Some(step.enter);
                        break;
                    }
                }
            }
        }
    }
    let Some(t0) = entry else {
        return probe;
    };
    let t1 = end.unwrap_or(t0 + params.d_max);
    let depth = (t1 - t0).clamp(0.0, params.d_max);
    probe.entry = Some(at(t0));
    probe.termination = Some(at(t0 + depth));
    probe.depth = Some(depth);
    probe
}

/// Heights of the probe layers for a cluster: the centroid height plus
/// whole `layer_height` steps that stay within the cluster's vertical span.
pub fn layers(grid: &VoxelGrid, cluster: &FrontierCluster, layer_height: f64) -> Vec<f64> {
    let cz = cluster.centroid[2];
    let lo = grid.center(cluster.bbox.min).z;
    let hi = grid.center(cluster.bbox.max).z;
    let down = ((cz - lo) / layer_height + 1e-9).floor().max(0.0) as i64;
    let up = ((hi - cz) / layer_height + 1e-9).floor().max(0.0) as i64;
    (-down..=up).map(|k| cz + k as f64 * layer_height).collect()
}

/// Casts probe fans for every activated node and each of its assigned
/// clusters. `clusters` must be sorted by id.
pub fn probe_depths(
    graph: &SkeletonGraph,
    activated: &[NodeId],
    clusters: &[FrontierCluster],
    grid: &VoxelGrid,
    params: &RegionParams,
) -> Vec<Probe> {
    let mut out = Vec::new();
    for &id in activated {
        let Some(node) = graph.node(id) else { continue };
        for cid in &node.assigned_frontiers {
            let Ok(i) = clusters.binary_search_by_key(cid, |c| c.id) else {
                continue;
            };
            let cluster = &clusters[i];
            for z in layers(grid, cluster, params.layer_height) {
                let origin = Vec3::new(cluster.centroid[0], cluster.centroid[1], z);
                for k in 0..AZIMUTHS as u8 {
                    out.push(cast_probe(grid, id, *cid, &origin, k, params));
                }
            }
        }
    }
    out
}
