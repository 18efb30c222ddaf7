//! Union-find clustering of activated nodes and isolation scoring.

use std::collections::{BTreeMap, BTreeSet};

use super::{isolation_score, IntersectionCounts, Probe, ProximityMetric, Region, RegionParams, AZIMUTHS};
use crate::geometry::Vec3;
use crate::kmeans::{split_by_size, KMeansInit};
use crate::skeleton::{NodeId, SkeletonGraph};
use crate::union_find::DisjointSet;

/// Components of the strong-connection graph over `activated`, each sorted,
/// ordered by smallest member. A pair is strongly connected when it has at
/// least `n_thr` crossing probes and lies closer than `d_prox`.
pub fn strong_components(
    activated: &[NodeId],
    counts: &IntersectionCounts,
    graph: &SkeletonGraph,
    params: &RegionParams,
) -> Vec<Vec<NodeId>> {
    let mut nodes = activated.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut ds = DisjointSet::new(nodes.len());
    for (a, b, c) in counts.iter() {
        if c < params.n_thr {
            continue;
        }
        let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
            continue;
        };
        let d = match params.proximity {
            ProximityMetric::Skeletal => graph
                .skeletal_distance_within(a, b, params.d_prox)
                .unwrap_or(f64::INFINITY),
            ProximityMetric::Euclidean => match (graph.node(a), graph.node(b)) {
                (Some(na), Some(nb)) => (na.position - nb.position).norm(),
                _ => f64::INFINITY,
            },
        };
        if d < params.d_prox {
            ds.union(ia, ib);
        }
    }
    ds.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|i| nodes[i]).collect())
        .collect()
}

/// Regions from strong components, splitting any component larger than
/// `t_size` with seeded k-means on node positions. Scores are left at their
/// defaults; see [`score_regions`].
pub fn cluster_regions(
    activated: &[NodeId],
    counts: &IntersectionCounts,
    graph: &SkeletonGraph,
    params: &RegionParams,
    seed: u64,
) -> Vec<Region> {
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    for comp in strong_components(activated, counts, graph, params) {
        if comp.len() <= params.t_size {
            groups.push(comp);
            continue;
        }
        let points: Vec<Vec3> = comp
            .iter()
            .map(|id| graph.node(*id).map(|n| n.position).unwrap_or_else(Vec3::zeros))
            .collect();
        for part in split_by_size(&points, params.t_size, 20, KMeansInit::Seeded(seed)) {
            groups.push(part.into_iter().map(|i| comp[i]).collect());
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
        .into_iter()
        .enumerate()
        .map(|(id, members)| Region {
            id,
            members,
            probes: Vec::new(),
            n_ext: 0,
            d_avg: [0.0; AZIMUTHS],
            s_iso: 1.0,
        })
        .collect()
}

/// Fills probe lists, neighbour counts, mean depths and isolation scores.
pub fn score_regions(
    regions: &mut [Region],
    probes: &[Probe],
    counts: &IntersectionCounts,
    params: &RegionParams,
) {
    let mut region_of: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (i, r) in regions.iter().enumerate() {
        for m in &r.members {
            region_of.insert(*m, i);
        }
    }
    let mut neighbours: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); regions.len()];
    for (a, b, c) in counts.iter() {
        if c == 0 {
            continue;
        }
        if let (Some(&ra), Some(&rb)) = (region_of.get(&a), region_of.get(&b)) {
            if ra != rb {
                neighbours[ra].insert(rb);
                neighbours[rb].insert(ra);
            }
        }
    }
    let mut sums = vec![[0.0f64; AZIMUTHS]; regions.len()];
    let mut hits = vec![[0usize; AZIMUTHS]; regions.len()];
    for r in regions.iter_mut() {
        r.probes.clear();
    }
    for (i, p) in probes.iter().enumerate() {
        let Some(&r) = region_of.get(&p.owner) else {
            continue;
        };
        regions[r].probes.push(i);
        if let Some(d) = p.depth {
            sums[r][p.azimuth as usize] += d;
            hits[r][p.azimuth as usize] += 1;
        }
    }
    for (i, r) in regions.iter_mut().enumerate() {
        for k in 0..AZIMUTHS {
            r.d_avg[k] = if hits[i][k] > 0 {
                sums[i][k] / hits[i][k] as f64
            } else {
                0.0
            };
        }
        r.n_ext = neighbours[i].len();
        r.s_iso = isolation_score(r.n_ext, r.d_avg_norm(), params.alpha, params.beta);
    }
}
