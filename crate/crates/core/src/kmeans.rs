//! Deterministic Lloyd's k-means, used to subdivide oversized frontier
//! clusters and oversized regions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug)]
pub enum KMeansInit {
    /// First point, then repeatedly the point farthest from chosen centers.
    FarthestPoint,
    /// k-means++ seeding driven by a ChaCha8 stream with this seed.
    Seeded(u64),
}

/// Returns one label in `0..k` per point. Ties go to the lower center index.
pub fn kmeans(points: &[Vec3], k: usize, max_iter: usize, init: KMeansInit) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let k = k.clamp(1, n);
    let mut centers = initial_centers(points, k, init);
    let mut labels = vec![0usize; n];
    for iter in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = nearest(&centers, p);
            if best != labels[i] || iter == 0 {
                changed |= best != labels[i];
                labels[i] = best;
            }
        }
        let mut sums = vec![Vec3::zeros(); k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            sums[labels[i]] += p;
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        if !changed && iter > 0 {
            break;
        }
    }
    labels
}

fn nearest(centers: &[Vec3], p: &Vec3) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = (center - p).norm_squared();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn initial_centers(points: &[Vec3], k: usize, init: KMeansInit) -> Vec<Vec3> {
    let mut centers = Vec::with_capacity(k);
    let mut dist = vec![f64::INFINITY; points.len()];
    let mut rng = match init {
        KMeansInit::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        KMeansInit::FarthestPoint => None,
    };
    let first = match rng.as_mut() {
        Some(r) => r.gen_range(0..points.len()),
        None => 0,
    };
    centers.push(points[first]);
    while centers.len() < k {
        let last = *centers.last().unwrap();
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min((p - last).norm_squared());
        }
        let next = match rng.as_mut() {
            Some(r) => {
                let total: f64 = dist.iter().sum();
                if total <= 0.0 {
                    break;
                }
                let mut target = r.gen::<f64>() * total;
                let mut pick = 0;
                for (i, d) in dist.iter().enumerate() {
                    if *d > 0.0 {
                        pick = i;
                    }
                    target -= d;
                    if target <= 0.0 && *d > 0.0 {
                        break;
                    }
                }
                pick
            }
            None => {
                let mut pick = 0;
                for (i, d) in dist.iter().enumerate() {
                    if *d > dist[pick] {
                        pick = i;
                    }
                }
                if dist[pick] <= 0.0 {
                    break;
                }
                pick
            }
        };
        centers.push(points[next]);
    }
    centers
}

/// Recursively partitions `points` into groups of at most `max_size` members
/// using k-means with `k = ceil(n / max_size)`. Groups are returned as sorted
/// index lists, ordered by their smallest index.
pub fn split_by_size(
    points: &[Vec3],
    max_size: usize,
    max_iter: usize,
    init: KMeansInit,
) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..points.len()).collect();
    let mut out = Vec::new();
    split_rec(points, all, max_size.max(1), max_iter, init, &mut out);
    for g in &mut out {
        g.sort_unstable();
    }
    out.sort_by_key(|g| g[0]);
    out
}

fn split_rec(
    points: &[Vec3],
    members: Vec<usize>,
    max_size: usize,
    max_iter: usize,
    init: KMeansInit,
    out: &mut Vec<Vec<usize>>,
) {
    if members.is_empty() {
        return;
    }
    if members.len() <= max_size {
        out.push(members);
        return;
    }
    let k = members.len().div_ceil(max_size);
    let pts: Vec<Vec3> = members.iter().map(|&i| points[i]).collect();
    let labels = kmeans(&pts, k, max_iter, init);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (m, l) in members.iter().zip(&labels) {
        groups[*l].push(*m);
    }
    groups.retain(|g| !g.is_empty());
    if groups.len() < 2 {
        // coincident points: fall back to an index split
        let mut members = members;
        let tail = members.split_off(members.len() / 2);
        groups = vec![members, tail];
    }
    for g in groups {
        split_rec(points, g, max_size, max_iter, init, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_blobs_separate() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(Vec3::new(i as f64 * 0.01, 0.0, 0.0));
            pts.push(Vec3::new(10.0 + i as f64 * 0.01, 0.0, 0.0));
        }
        let labels = kmeans(&pts, 2, 20, KMeansInit::FarthestPoint);
        for i in 0..10 {
            assert_eq!(labels[2 * i], labels[0]);
            assert_eq!(labels[2 * i + 1], labels[1]);
        }
        assert_ne!(labels[0], labels[1]);
    }

    #[test]
    fn split_respects_cap() {
        let pts: Vec<Vec3> = (0..95).map(|i| Vec3::new(i as f64, (i % 7) as f64, 0.0)).collect();
        for init in [KMeansInit::FarthestPoint, KMeansInit::Seeded(3)] {
            let groups = split_by_size(&pts, 10, 20, init);
            assert!(groups.iter().all(|g| g.len() <= 10 && !g.is_empty()));
            let mut all: Vec<usize> = groups.concat();
            all.sort_unstable();
            assert_eq!(all, (0..95).collect::<Vec<_>>());
        }
    }

    #[test]
    fn seeded_is_deterministic() {
        let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new((i * 37 % 11) as f64, i as f64, 0.0)).collect();
        let a = split_by_size(&pts, 8, 20, KMeansInit::Seeded(9));
        let b = split_by_size(&pts, 8, 20, KMeansInit::Seeded(9));
        assert_eq!(a, b);
    }
}
