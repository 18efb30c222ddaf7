//! Shortest-path queries over the skeleton: skeletal (Euclidean edge
//! weights) and hop (unit weights) distances.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{NodeId, SkeletonGraph};
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, id)
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One node reached by a bounded breadth-first search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BfsEntry {
    pub node: NodeId,
    pub hops: u32,
    pub parent: Option<NodeId>,
}

impl SkeletonGraph {
    fn dijkstra(
        &self,
        sources: &[(NodeId, f64)],
        target: Option<NodeId>,
        cutoff: f64,
    ) -> (Vec<f64>, Vec<Option<NodeId>>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![None; n];
        let mut heap = BinaryHeap::new();
        for &(s, c) in sources {
            if self.contains(s) && c < dist[s.0 as usize] {
                dist[s.0 as usize] = c;
                heap.push(Entry { cost: c, node: s });
            }
        }
        while let Some(Entry { cost, node }) = heap.pop() {
            if cost > dist[node.0 as usize] {
                continue;
            }
            if Some(node) == target {
                break;
            }
            for &(m, w) in self.neighbors(node) {
                let c = cost + w;
                if c < dist[m.0 as usize] && c <= cutoff {
                    dist[m.0 as usize] = c;
                    parent[m.0 as usize] = Some(node);
                    heap.push(Entry { cost: c, node: m });
                }
            }
        }
        (dist, parent)
    }

    /// Length of the shortest path between two nodes, summing Euclidean edge
    /// lengths. Infinite when the nodes are disconnected. The search always
    /// runs from the lower id so the result is exactly symmetric.
    pub fn skeletal_distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        self.try_node(a)?;
        self.try_node(b)?;
        if a == b {
            return Ok(0.0);
        }
        let (a, b) = (a.min(b), a.max(b));
        let (dist, _) = self.dijkstra(&[(a, 0.0)], Some(b), f64::INFINITY);
        Ok(dist[b.0 as usize])
    }

    /// Like [`Self::skeletal_distance`] but gives up beyond `cutoff`,
    /// returning infinity for farther pairs.
    pub fn skeletal_distance_within(&self, a: NodeId, b: NodeId, cutoff: f64) -> Result<f64> {
        self.try_node(a)?;
        self.try_node(b)?;
        if a == b {
            return Ok(0.0);
        }
        let (a, b) = (a.min(b), a.max(b));
        let (dist, _) = self.dijkstra(&[(a, 0.0)], Some(b), cutoff);
        Ok(dist[b.0 as usize])
    }

    /// Skeletal distance from the nearest of several weighted sources to
    /// every node, indexed by node id. Removed or unreachable ids hold
    /// infinity.
    pub fn distances_from(&self, sources: &[(NodeId, f64)]) -> Vec<f64> {
        self.dijkstra(sources, None, f64::INFINITY).0
    }

    /// Node sequence of a shortest path from `a` to `b`, or `None` when
    /// disconnected.
    pub fn shortest_path(&self, a: NodeId, b: NodeId) -> Result<Option<Vec<NodeId>>> {
        self.try_node(a)?;
        self.try_node(b)?;
        let (dist, parent) = self.dijkstra(&[(a, 0.0)], Some(b), f64::INFINITY);
        if dist[b.0 as usize].is_infinite() {
            return Ok(None);
        }
        let mut path = vec![b];
        let mut cur = b;
        while let Some(p) = parent[cur.0 as usize] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Ok(Some(path))
    }

    /// Number of edges on a fewest-edge path, `None` when disconnected.
    pub fn hop_distance(&self, a: NodeId, b: NodeId) -> Result<Option<u32>> {
        self.try_node(a)?;
        self.try_node(b)?;
        Ok(self
            .bfs(a, u32::MAX)
            .into_iter()
            .find(|e| e.node == b)
            .map(|e| e.hops))
    }

    /// Breadth-first search from `start` up to `max_hops` edges. Entries are
    /// in visiting order (by hop count, neighbours in ascending id).
    pub fn bfs(&self, start: NodeId, max_hops: u32) -> Vec<BfsEntry> {
        if !self.contains(start) {
            return Vec::new();
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut out = vec![BfsEntry {
            node: start,
            hops: 0,
            parent: None,
        }];
        seen[start.0 as usize] = true;
        let mut queue = VecDeque::from([(start, 0u32)]);
        while let Some((node, hops)) = queue.pop_front() {
            if hops >= max_hops {
                continue;
            }
            for &(m, _) in self.neighbors(node) {
                if !seen[m.0 as usize] {
                    seen[m.0 as usize] = true;
                    out.push(BfsEntry {
                        node: m,
                        hops: hops + 1,
                        parent: Some(node),
                    });
                    queue.push_back((m, hops + 1));
                }
            }
        }
        out
    }

    /// Path from the BFS root to `target` reconstructed from `tree`.
    pub fn bfs_path(tree: &[BfsEntry], target: NodeId) -> Option<Vec<NodeId>> {
        let lookup = |id: NodeId| tree.iter().find(|e| e.node == id);
        let mut path = vec![target];
        let mut cur = lookup(target)?;
        while let Some(p) = cur.parent {
            path.push(p);
            cur = lookup(p)?;
        }
        path.reverse();
        Some(path)
    }

    /// Sum of Euclidean segment lengths along a node sequence.
    pub fn path_length(&self, path: &[NodeId]) -> Result<f64> {
        let mut total = 0.0;
        for w in path.windows(2) {
            let a = self.try_node(w[0])?.position;
            let b = self.try_node(w[1])?.position;
            total += (a - b).norm();
        }
        if path.len() == 1 {
            self.try_node(path[0])?;
        }
        if path.is_empty() {
            return Err(CoreError::EmptyPath);
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::skeleton::GraphParams;

    fn chain() -> (SkeletonGraph, [NodeId; 3]) {
        let mut g = SkeletonGraph::new(GraphParams::default()).unwrap();
        let a = g.insert_node(Vec3::new(0.0, 0.0, 0.0), [0, 0, 0], 1.0);
        let b = g.insert_node(Vec3::new(1.0, 0.0, 0.0), [0, 0, 0], 1.0);
        let c = g.insert_node(Vec3::new(1.0, 1.0, 0.0), [0, 0, 0], 1.0);
        g.insert_edge(a, b);
        g.insert_edge(b, c);
        (g, [a, b, c])
    }

    #[test]
    fn chain_distances() {
        let (g, [a, b, c]) = chain();
        assert_eq!(g.skeletal_distance(a, a).unwrap(), 0.0);
        assert_eq!(g.skeletal_distance(a, c).unwrap(), 2.0);
        assert_eq!(g.hop_distance(a, c).unwrap(), Some(2));
        assert_eq!(g.hop_distance(a, b).unwrap(), Some(1));
        assert_eq!(g.shortest_path(a, c).unwrap(), Some(vec![a, b, c]));
        assert_eq!(g.path_length(&[a, b, c]).unwrap(), 2.0);
    }

    #[test]
    fn disconnected_and_unknown() {
        let (mut g, [a, _, _]) = chain();
        let d = g.insert_node(Vec3::new(5.0, 0.0, 0.0), [0, 0, 0], 1.0);
        assert!(g.skeletal_distance(a, d).unwrap().is_infinite());
        assert_eq!(g.hop_distance(a, d).unwrap(), None);
        assert_eq!(g.shortest_path(a, d).unwrap(), None);
        assert!(matches!(
            g.skeletal_distance(a, NodeId(99)),
            Err(CoreError::UnknownNode(NodeId(99)))
        ));
    }

    #[test]
    fn bounded_bfs() {
        let (g, [a, b, c]) = chain();
        let tree = g.bfs(a, 1);
        assert_eq!(tree.iter().map(|e| e.node).collect::<Vec<_>>(), vec![a, b]);
        let tree = g.bfs(a, 2);
        assert_eq!(SkeletonGraph::bfs_path(&tree, c), Some(vec![a, b, c]));
    }

    #[test]
    fn multi_source() {
        let (g, [a, b, c]) = chain();
        let d = g.distances_from(&[(a, 0.0), (c, 0.25)]);
        assert_eq!(d[b.0 as usize], 1.0);
        assert_eq!(d[c.0 as usize], 0.25);
    }
}
