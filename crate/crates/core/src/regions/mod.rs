//! Implicit unknown-region analysis.
//!
//! Activated skeleton nodes are grouped into regions that probably lead into
//! the same unknown volume. Each frontier cluster casts eight horizontal
//! probes into unknown space; nodes whose probes cross often and that sit
//! close on the skeleton are merged. Every region gets an isolation score
//! that grows as it has fewer neighbours and shallower unknown space.

mod cluster;
mod intersect;
mod probe;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid_map::{FrontierCluster, VoxelGrid};
use crate::skeleton::{NodeId, SkeletonGraph};

pub use cluster::{cluster_regions, score_regions, strong_components};
pub use intersect::{count_intersections, probes_intersect, IntersectionCounts};
pub use probe::{cast_probe, probe_depths, AZIMUTHS};

/// How node proximity is measured for merging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximityMetric {
    /// Shortest-path length on the skeleton.
    #[default]
    Skeletal,
    /// Straight-line distance between node positions.
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    /// Maximum distance from the probe origin to the first Unknown voxel (m).
    pub d_init: f64,
    /// Probe depth cap (m).
    pub d_max: f64,
    /// Proximity threshold for merging (m).
    pub d_prox: f64,
    /// Minimum crossing-probe count for merging.
    pub n_thr: u32,
    /// Maximum nodes per region before k-means subdivision.
    pub t_size: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Vertical spacing of probe layers (m).
    pub layer_height: f64,
    pub proximity: ProximityMetric,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            d_init: 1.0,
            d_max: 5.0,
            d_prox: 4.0,
            n_thr: 3,
            t_size: 8,
            alpha: 0.5,
            beta: 0.2,
            layer_height: 0.5,
            proximity: ProximityMetric::Skeletal,
        }
    }
}

impl RegionParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, bool); 8] = [
            ("d_init", self.d_init > 0.0),
            ("d_max", self.d_max > 0.0),
            ("d_prox", self.d_prox > 0.0),
            ("n_thr", self.n_thr >= 1),
            ("t_size", self.t_size >= 1),
            ("alpha", self.alpha > 0.0),
            ("beta", self.beta > 0.0),
            ("layer_height", self.layer_height > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(CoreError::InvalidParameter {
                    name,
                    reason: "must be positive".into(),
                });
            }
        }
        Ok(())
    }
}

/// One horizontal ray cast from a frontier-cluster centroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub owner: NodeId,
    pub cluster: u32,
    pub origin: [f64; 3],
    /// Azimuth index `k`; the direction is `k * 45` degrees.
    pub azimuth: u8,
    pub layer_z: f64,
    /// First point inside Unknown space.
    pub entry: Option<[f64; 3]>,
    pub termination: Option<[f64; 3]>,
    /// Unknown depth in meters, `None` for invalid probes.
    pub depth: Option<f64>,
}

impl Probe {
    pub fn is_valid(&self) -> bool {
        self.depth.is_some()
    }

    /// Entry and termination projected to the horizontal plane.
    pub fn segment_2d(&self) -> Option<([f64; 2], [f64; 2])> {
        match (self.entry, self.termination) {
            (Some(a), Some(b)) => Some(([a[0], a[1]], [b[0], b[1]])),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    /// Member nodes in ascending id order.
    pub members: Vec<NodeId>,
    /// Indices into the probe list of the analysis.
    pub probes: Vec<usize>,
    /// Distinct other regions sharing at least one probe crossing.
    pub n_ext: usize,
    pub d_avg: [f64; 8],
    pub s_iso: f64,
}

impl Region {
    pub fn d_avg_norm(&self) -> f64 {
        self.d_avg.iter().map(|d| d * d).sum::<f64>().sqrt()
    }
}

/// Isolation score `1 / (1 + alpha * n_ext + beta * |d_avg|)`.
pub fn isolation_score(n_ext: usize, d_avg_norm: f64, alpha: f64, beta: f64) -> f64 {
    1.0 / (1.0 + alpha * n_ext as f64 + beta * d_avg_norm)
}

/// Output of one full analysis pass.
#[derive(Clone, Debug, Default)]
pub struct RegionAnalysis {
    pub probes: Vec<Probe>,
    pub counts: IntersectionCounts,
    pub regions: Vec<Region>,
    region_of: BTreeMap<NodeId, usize>,
}

impl RegionAnalysis {
    /// Assembles an analysis from finished regions.
    pub fn from_regions(probes: Vec<Probe>, counts: IntersectionCounts, regions: Vec<Region>) -> Self {
        let mut region_of = BTreeMap::new();
        for (i, r) in regions.iter().enumerate() {
            for m in &r.members {
                region_of.insert(*m, i);
            }
        }
        Self {
            probes,
            counts,
            regions,
            region_of,
        }
    }

    pub fn region_of(&self, node: NodeId) -> Option<&Region> {
        self.region_of.get(&node).map(|&r| &self.regions[r])
    }

    pub fn records(&self) -> Vec<RegionRecord> {
        self.regions
            .iter()
            .map(|r| RegionRecord {
                id: r.id,
                members: r.members.clone(),
                n_ext: r.n_ext,
                d_avg: r.d_avg,
                s_iso: r.s_iso,
            })
            .collect()
    }
}

/// Serialized form of a region for trace files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub id: usize,
    pub members: Vec<NodeId>,
    pub n_ext: usize,
    pub d_avg: [f64; 8],
    pub s_iso: f64,
}

/// Probes, counts, clusters and scores every activated node of `graph`.
/// `clusters` must be sorted by id.
pub fn analyze(
    graph: &SkeletonGraph,
    clusters: &[FrontierCluster],
    grid: &VoxelGrid,
    params: &RegionParams,
    seed: u64,
) -> RegionAnalysis {
    let activated: Vec<NodeId> = graph.activated_nodes().map(|n| n.id).collect();
    let probes = probe_depths(graph, &activated, clusters, grid, params);
    let counts = count_intersections(&probes, grid.voxel_size(), params.layer_height);
    let mut regions = cluster_regions(&activated, &counts, graph, params, seed);
    score_regions(&mut regions, &probes, &counts, params);
    RegionAnalysis::from_regions(probes, counts, regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_examples() {
        assert_eq!(isolation_score(0, 0.0, 0.5, 0.2), 1.0);
        assert!((isolation_score(2, 5.0, 0.5, 0.2) - 1.0 / 3.0).abs() < 1e-15);
        assert!(isolation_score(3, 5.0, 0.5, 0.2) < isolation_score(2, 5.0, 0.5, 0.2));
    }

    #[test]
    fn params_reject_zero() {
        let p = RegionParams {
            n_thr: 0,
            ..RegionParams::default()
        };
        assert!(p.validate().is_err());
        assert!(RegionParams::default().validate().is_ok());
    }
}
