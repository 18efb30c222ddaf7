//! Region-sequence planner: inter-region skeletal cost matrix and the
//! choice of the next region and entry node.

use serde::{Deserialize, Serialize};

use super::tsp::Tour;
use crate::error::{CoreError, Result};
use crate::regions::Region;
use crate::skeleton::{NodeId, SkeletonGraph};

/// Symmetric cost matrix over a virtual start (index 0) and the regions
/// (index `i + 1` for `regions[i]`). Infinite entries mark disconnection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    size: usize,
    entries: Vec<f64>,
    /// Region id per matrix index `1..size`.
    pub region_ids: Vec<usize>,
}

impl CostMatrix {
    /// A matrix from explicit rows; used by tests and tools.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(CoreError::EmptyMatrix);
        }
        if rows.iter().any(|r| r.len() != size) {
            return Err(CoreError::InvalidParameter {
                name: "rows",
                reason: "matrix must be square".into(),
            });
        }
        Ok(Self {
            size,
            entries: rows.into_iter().flatten().collect(),
            region_ids: (0..size.saturating_sub(1)).collect(),
        })
    }

    /// Number of rows, including the virtual start.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.size + j] = v;
        self.entries[j * self.size + i] = v;
    }

    /// Order-sensitive digest of the finite entries, for plan logs.
    pub fn checksum(&self) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(k, v)| v * ((k % 97) as f64 + 1.0))
            .sum()
    }
}

fn min_over(dist: &[f64], members: &[NodeId]) -> f64 {
    members
        .iter()
        .map(|m| dist.get(m.0 as usize).copied().unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum skeletal distance between every pair of regions, plus a start row
/// holding the distance from `v_cur` to each region. One multi-source
/// shortest-path pass per region.
pub fn build_cost_matrix(
    regions: &[Region],
    graph: &SkeletonGraph,
    v_cur: NodeId,
) -> Result<CostMatrix> {
    if regions.is_empty() {
        return Err(CoreError::EmptyMatrix);
    }
    graph.try_node(v_cur)?;
    let size = regions.len() + 1;
    let mut m = CostMatrix {
        size,
        entries: vec![0.0; size * size],
        region_ids: regions.iter().map(|r| r.id).collect(),
    };
    let from_cur = graph.distances_from(&[(v_cur, 0.0)]);
    for (i, r) in regions.iter().enumerate() {
        m.set_sym(0, i + 1, min_over(&from_cur, &r.members));
    }
    for (i, r) in regions.iter().enumerate() {
        if i + 1 == regions.len() {
            break;
        }
        let sources: Vec<(NodeId, f64)> = r.members.iter().map(|n| (*n, 0.0)).collect();
        let dist = graph.distances_from(&sources);
        for (j, other) in regions.iter().enumerate().skip(i + 1) {
            m.set_sym(i + 1, j + 1, min_over(&dist, &other.members));
        }
    }
    Ok(m)
}

/// First region of the tour and its member closest to `v_cur` on the
/// skeleton (ties to the lower id). Returns the region's index in `regions`.
pub fn next_global_target(
    tour: &Tour,
    regions: &[Region],
    graph: &SkeletonGraph,
    v_cur: NodeId,
) -> Result<(usize, NodeId)> {
    let &first = tour.order.first().ok_or(CoreError::Stalled)?;
    let region_index = first - 1;
    let region = regions.get(region_index).ok_or(CoreError::Stalled)?;
    let dist = graph.distances_from(&[(v_cur, 0.0)]);
    let mut best: Option<(f64, NodeId)> = None;
    for &m in &region.members {
        let d = dist.get(m.0 as usize).copied().unwrap_or(f64::INFINITY);
        if !d.is_finite() {
            continue;
        }
        if best.is_none_or(|(bd, bid)| d < bd || (d == bd && m < bid)) {
            best = Some((d, m));
        }
    }
    best.map(|(_, m)| (region_index, m)).ok_or(CoreError::Stalled)
}
