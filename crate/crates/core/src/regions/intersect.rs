//! Counting crossing probe pairs between nodes.

use std::collections::BTreeMap;

use super::Probe;
use crate::geometry::segment_distance_2d;
use crate::skeleton::NodeId;

/// Symmetric sparse map from node pairs to the number of crossing probe
/// pairs between them. Keys are stored with the lower id first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntersectionCounts {
    counts: BTreeMap<(NodeId, NodeId), u32>,
}

impl IntersectionCounts {
    pub fn get(&self, a: NodeId, b: NodeId) -> u32 {
        if a == b {
            return 0;
        }
        self.counts.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    pub fn increment(&mut self, a: NodeId, b: NodeId) {
        if a != b {
            *self.counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }

    /// Nonzero entries as `(a, b, count)` with `a < b`, ordered.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        self.counts.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Whether two probes count as crossing: both valid, different owners,
/// layers closer than `layer_height`, and 2D segments within `tolerance`.
pub fn probes_intersect(p: &Probe, q: &Probe, tolerance: f64, layer_height: f64) -> bool {
    if p.owner == q.owner || (p.layer_z - q.layer_z).abs() >= layer_height {
        return false;
    }
    match (p.segment_2d(), q.segment_2d()) {
        (Some((a0, a1)), Some((b0, b1))) => segment_distance_2d(a0, a1, b0, b1) <= tolerance,
        _ => false,
    }
}

/// Counts crossing probe pairs for every node pair. A sweep over the x
/// extent of each segment prunes pairs that cannot be within `tolerance`.
pub fn count_intersections(probes: &[Probe], tolerance: f64, layer_height: f64) -> IntersectionCounts {
    let mut spans: Vec<(f64, f64, usize)> = probes
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let (a, b) = p.segment_2d()?;
            Some((a[0].min(b[0]) - tolerance, a[0].max(b[0]) + tolerance, i))
        })
        .collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    let mut counts = IntersectionCounts::default();
    for (k, &(_, hi, i)) in spans.iter().enumerate() {
        for &(lo_j, _, j) in &spans[k + 1..] {
            if lo_j > hi {
                break;
            }
            if probes_intersect(&probes[i], &probes[j], tolerance, layer_height) {
                counts.increment(probes[i].owner, probes[j].owner);
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(owner: u32, a: [f64; 2], b: [f64; 2], z: f64) -> Probe {
        Probe {
            owner: NodeId(owner),
            cluster: owner,
            origin: [a[0], a[1], z],
            azimuth: 0,
            layer_z: z,
            entry: Some([a[0], a[1], z]),
            termination: Some([b[0], b[1], z]),
            depth: Some(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()),
        }
    }

    #[test]
    fn perpendicular_crossing() {
        let p = probe(0, [0.0, 1.0], [2.0, 1.0], 1.0);
        let q = probe(1, [1.0, 0.0], [1.0, 2.0], 1.0);
        let c = count_intersections(&[p, q], 0.1, 0.5);
        assert_eq!(c.get(NodeId(0), NodeId(1)), 1);
        assert_eq!(c.get(NodeId(1), NodeId(0)), 1);
    }

    #[test]
    fn layers_apart_do_not_count() {
        let p = probe(0, [0.0, 1.0], [2.0, 1.0], 1.0);
        let q = probe(1, [1.0, 0.0], [1.0, 2.0], 2.0);
        assert!(count_intersections(&[p, q], 0.1, 0.5).is_empty());
    }

    #[test]
    fn same_owner_ignored_and_near_miss_counts() {
        let p = probe(0, [0.0, 1.0], [2.0, 1.0], 1.0);
        let q = probe(0, [1.0, 0.0], [1.0, 2.0], 1.0);
        assert!(count_intersections(&[p.clone(), q], 0.1, 0.5).is_empty());
        let r = probe(2, [1.0, 1.05], [1.0, 3.0], 1.0);
        assert_eq!(count_intersections(&[p, r], 0.1, 0.5).get(NodeId(0), NodeId(2)), 1);
    }
}
