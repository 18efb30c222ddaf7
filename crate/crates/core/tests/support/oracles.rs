//! Brute-force reference implementations and randomized comparison suites.
//!
//! Each suite returns `Ok(n)` with the number of checked cases or an error
//! describing the first mismatch. The file is shared with the simulator's
//! acceptance target through `#[path]`.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skelex_core::grid_map::{Aabb, FrontierCluster, Occupancy, VoxelGrid};
use skelex_core::planner::{build_cost_matrix, next_global_target, solve_tsp, tour_cost, CostMatrix};
use skelex_core::regions::{
    count_intersections, strong_components, IntersectionCounts, Probe, ProximityMetric, Region,
    RegionParams,
};
use skelex_core::skeleton::{GraphParams, NodeId, SkeletonGraph};
use skelex_core::Vec3;

// ---------------------------------------------------------------- ESDF

/// Reference ESDF value of voxel `v`: nearest Occupied voxel by direct scan.
fn esdf_reference(grid: &VoxelGrid, v: [i32; 3]) -> Option<f32> {
    if grid.occupancy(v) != Some(Occupancy::Free) {
        return None;
    }
    let vs = grid.voxel_size();
    let trunc = grid.truncation();
    let reach = (trunc / vs).ceil() as i32 + 1;
    let mut best: Option<i64> = None;
    for dz in -reach..=reach {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let w = [v[0] + dx, v[1] + dy, v[2] + dz];
                if grid.occupancy(w) == Some(Occupancy::Occupied) {
                    let d2 = (dx * dx + dy * dy + dz * dz) as i64;
                    best = Some(best.map_or(d2, |b| b.min(d2)));
                }
            }
        }
    }
    Some(match best {
        Some(d2) => ((d2 as f64).sqrt() * vs).min(trunc) as f32,
        None => trunc as f32,
    })
}

fn random_state(rng: &mut ChaCha8Rng) -> Occupancy {
    match rng.gen_range(0..10) {
        0..=1 => Occupancy::Occupied,
        2 => Occupancy::Unknown,
        _ => Occupancy::Free,
    }
}

fn compare_esdf(grid: &VoxelGrid, seed: u64, stage: &str) -> Result<(), String> {
    for i in 0..grid.len() {
        let v = grid.voxel_from_linear(i);
        let want = esdf_reference(grid, v);
        let got = grid.esdf(v);
        if want.map(f32::to_bits) != got.map(f32::to_bits) {
            return Err(format!(
                "esdf seed {seed} ({stage}) voxel {v:?}: got {got:?}, want {want:?}"
            ));
        }
    }
    Ok(())
}

/// Full and incremental ESDF against the direct-scan reference on random
/// grids up to 32 voxels per side.
pub fn esdf_suite(seeds: std::ops::Range<u64>) -> Result<usize, String> {
    let mut n = 0;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [
            rng.gen_range(4..=32),
            rng.gen_range(4..=32),
            rng.gen_range(4..=32),
        ];
        let trunc = [0.3, 0.5, 0.8][rng.gen_range(0..3)];
        let mut grid = VoxelGrid::new(Vec3::zeros(), 0.1, dims, trunc).unwrap();
        for i in 0..grid.len() {
            let v = grid.voxel_from_linear(i);
            // sparse obstacles keep distances non-trivial
            let s = if rng.gen_bool(0.7) {
                Occupancy::Free
            } else {
                random_state(&mut rng)
            };
            grid.set_occupancy(v, s);
        }
        grid.compute_esdf(&grid.full_aabb());
        compare_esdf(&grid, seed, "full")?;
        // local edit followed by an incremental update
        let lo = [
            rng.gen_range(0..dims[0] as i32),
            rng.gen_range(0..dims[1] as i32),
            rng.gen_range(0..dims[2] as i32),
        ];
        let hi = [
            (lo[0] + rng.gen_range(0..4)).min(dims[0] as i32 - 1),
            (lo[1] + rng.gen_range(0..4)).min(dims[1] as i32 - 1),
            (lo[2] + rng.gen_range(0..4)).min(dims[2] as i32 - 1),
        ];
        let dirty = Aabb::new(lo, hi);
        for v in dirty.iter() {
            grid.set_occupancy(v, random_state(&mut rng));
        }
        grid.compute_esdf(&dirty);
        compare_esdf(&grid, seed, "incremental")?;
        n += 1;
    }
    Ok(n)
}

// ---------------------------------------------------------------- graphs

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p_edge: f64) -> SkeletonGraph {
    let mut g = SkeletonGraph::new(GraphParams::default()).unwrap();
    for _ in 0..n {
        let p = Vec3::new(
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.0..3.0),
        );
        g.insert_node(p, [0, 0, 0], 1.0);
    }
    for a in 0..n as u32 {
        for b in (a + 1)..n as u32 {
            if rng.gen_bool(p_edge) {
                g.insert_edge(NodeId(a), NodeId(b));
            }
        }
    }
    g
}

/// All-pairs shortest paths by Floyd-Warshall; `unit` uses weight 1 edges.
pub fn floyd(g: &SkeletonGraph, unit: bool) -> Vec<Vec<f64>> {
    let n = g.id_bound();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        if g.contains(NodeId(i as u32)) {
            d[i][i] = 0.0;
        }
    }
    for e in g.edges() {
        let w = if unit { 1.0 } else { e.length };
        let (a, b) = (e.a.0 as usize, e.b.0 as usize);
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn close(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite() && a.signum() == b.signum())
        || (a - b).abs() <= 1e-9 * (1.0 + a.abs())
}

/// Skeletal and hop distances against Floyd-Warshall on random graphs.
pub fn distance_suite(graphs: u64, pairs: usize) -> Result<usize, String> {
    let mut n_checked = 0;
    for seed in 0..graphs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let g = random_graph(&mut rng, 30, 0.08);
        let dw = floyd(&g, false);
        let du = floyd(&g, true);
        for _ in 0..pairs {
            let a = NodeId(rng.gen_range(0..30));
            let b = NodeId(rng.gen_range(0..30));
            let got = g.skeletal_distance(a, b).unwrap();
            let want = dw[a.0 as usize][b.0 as usize];
            if !close(got, want) {
                return Err(format!("graph {seed}: d_skel({a},{b}) = {got}, oracle {want}"));
            }
            let hops = g.hop_distance(a, b).unwrap().map(f64::from).unwrap_or(f64::INFINITY);
            let want = du[a.0 as usize][b.0 as usize];
            if hops != want {
                return Err(format!("graph {seed}: h_skel({a},{b}) = {hops}, oracle {want}"));
            }
            n_checked += 1;
        }
    }
    Ok(n_checked)
}

// ---------------------------------------------------------------- regions

fn dfs_components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Strong-connection clustering against depth-first components computed
/// from Floyd-Warshall distances.
pub fn clustering_suite(instances: u64) -> Result<usize, String> {
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let g = random_graph(&mut rng, 30, 0.1);
        let params = RegionParams {
            proximity: if seed % 2 == 0 {
                ProximityMetric::Skeletal
            } else {
                ProximityMetric::Euclidean
            },
            ..RegionParams::default()
        };
        let dist = floyd(&g, false);
        let mut counts = IntersectionCounts::default();
        for _ in 0..120 {
            let a = NodeId(rng.gen_range(0..30));
            let b = NodeId(rng.gen_range(0..30));
            counts.increment(a, b);
        }
        let activated: Vec<NodeId> = (0..30).map(NodeId).collect();
        let got = strong_components(&activated, &counts, &g, &params);

        let mut adj = vec![Vec::new(); 30];
        for i in 0..30usize {
            for j in 0..30usize {
                if i == j {
                    continue;
                }
                let d = match params.proximity {
                    ProximityMetric::Skeletal => dist[i][j],
                    ProximityMetric::Euclidean => {
                        let pi = g.node(NodeId(i as u32)).unwrap().position;
                        let pj = g.node(NodeId(j as u32)).unwrap().position;
                        (pi - pj).norm()
                    }
                };
                if counts.get(NodeId(i as u32), NodeId(j as u32)) >= params.n_thr
                    && d < params.d_prox
                {
                    adj[i].push(j);
                }
            }
        }
        let want: Vec<Vec<NodeId>> = dfs_components(30, &adj)
            .into_iter()
            .map(|c| c.into_iter().map(|i| NodeId(i as u32)).collect())
            .collect();
        if got != want {
            return Err(format!("clustering instance {seed}: {got:?} vs oracle {want:?}"));
        }
    }
    Ok(instances as usize)
}

fn seg_dist(a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]) -> f64 {
    fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    }
    fn pt(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let (vx, vy) = (b[0] - a[0], b[1] - a[1]);
        let l = vx * vx + vy * vy;
        let t = if l > 0.0 {
            (((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / l).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ((a[0] + t * vx - p[0]).powi(2) + (a[1] + t * vy - p[1]).powi(2)).sqrt()
    }
    let o1 = orient(a0, a1, b0);
    let o2 = orient(a0, a1, b1);
    let o3 = orient(b0, b1, a0);
    let o4 = orient(b0, b1, a1);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    pt(a0, b0, b1)
        .min(pt(a1, b0, b1))
        .min(pt(b0, a0, a1))
        .min(pt(b1, a0, a1))
}

pub fn random_probes(rng: &mut ChaCha8Rng, nodes: u32) -> Vec<Probe> {
    let mut probes = Vec::new();
    for owner in 0..nodes {
        for k in 0..8u8 {
            let z = [1.0, 1.3, 1.6, 2.2][rng.gen_range(0..4)];
            let a = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
            let b = [a[0] + rng.gen_range(-3.0..3.0), a[1] + rng.gen_range(-3.0..3.0)];
            let valid = rng.gen_bool(0.8);
            probes.push(Probe {
                owner: NodeId(owner),
                cluster: owner,
                origin: [a[0], a[1], z],
                azimuth: k,
                layer_z: z,
                entry: valid.then_some([a[0], a[1], z]),
                termination: valid.then_some([b[0], b[1], z]),
                depth: valid.then(|| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()),
            });
        }
    }
    probes
}

/// Probe crossing counts against the all-pairs segment test.
pub fn intersection_suite(instances: u64) -> Result<usize, String> {
    let tol = 0.1;
    let layer = 0.5;
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let probes = random_probes(&mut rng, 6);
        let got = count_intersections(&probes, tol, layer);
        let mut want: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
        for i in 0..probes.len() {
            for j in (i + 1)..probes.len() {
                let (p, q) = (&probes[i], &probes[j]);
                if p.owner == q.owner || (p.layer_z - q.layer_z).abs() >= layer {
                    continue;
                }
                let (Some(pe), Some(pt), Some(qe), Some(qt)) =
                    (p.entry, p.termination, q.entry, q.termination)
                else {
                    continue;
                };
                let d = seg_dist([pe[0], pe[1]], [pt[0], pt[1]], [qe[0], qe[1]], [qt[0], qt[1]]);
                if d <= tol {
                    let key = (p.owner.min(q.owner), p.owner.max(q.owner));
                    *want.entry(key).or_insert(0) += 1;
                }
            }
        }
        let got_map: BTreeMap<(NodeId, NodeId), u32> =
            got.iter().map(|(a, b, c)| ((a, b), c)).collect();
        if got_map != want {
            return Err(format!("intersection instance {seed}: {got_map:?} vs oracle {want:?}"));
        }
    }
    Ok(instances as usize)
}

// ---------------------------------------------------------------- TSP

fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

fn brute_force_open_tsp(m: &CostMatrix) -> f64 {
    let mut items: Vec<usize> = (1..m.size()).collect();
    let mut best = f64::INFINITY;
    permutations(&mut items, 0, &mut |order| {
        best = best.min(tour_cost(m, order));
    });
    best
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, size: usize) -> CostMatrix {
    let mut rows = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in (i + 1)..size {
            let v = rng.gen_range(1.0..10.0);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    CostMatrix::from_rows(rows).unwrap()
}

/// Solver cost against the exhaustive optimum for 1 to 9 regions. Returns
/// the worst observed cost ratio.
pub fn tsp_suite(seeds: u64) -> Result<f64, String> {
    let mut worst: f64 = 1.0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let regions = 1 + (seed as usize % 9);
        let m = random_symmetric(&mut rng, regions + 1);
        let tour = solve_tsp(&m).map_err(|e| e.to_string())?;
        let again = solve_tsp(&m).map_err(|e| e.to_string())?;
        if tour != again {
            return Err(format!("tsp seed {seed}: nondeterministic tour"));
        }
        let mut sorted = tour.order.clone();
        sorted.sort_unstable();
        if sorted != (1..=regions).collect::<Vec<_>>() {
            return Err(format!("tsp seed {seed}: not a permutation {:?}", tour.order));
        }
        if (tour_cost(&m, &tour.order) - tour.cost).abs() > 1e-9 {
            return Err(format!("tsp seed {seed}: reported cost mismatch"));
        }
        let opt = brute_force_open_tsp(&m);
        let ratio = tour.cost / opt;
        worst = worst.max(ratio);
        if ratio > 1.05 {
            return Err(format!("tsp seed {seed}: cost {} vs optimum {opt}", tour.cost));
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------- skeleton

/// Room with walls on the grid boundary and random full-height pillars.
pub fn pillar_room(rng: &mut ChaCha8Rng, n: usize, pillars: usize) -> VoxelGrid {
    let mut g = VoxelGrid::new(Vec3::zeros(), 0.1, [n, n, n], 5.0).unwrap();
    let mut boxes = Vec::new();
    for _ in 0..pillars {
        let x = rng.gen_range(3..n as i32 - 6);
        let y = rng.gen_range(3..n as i32 - 6);
        boxes.push((x, y, rng.gen_range(2..5)));
    }
    for i in 0..g.len() {
        let v = g.voxel_from_linear(i);
        let n = n as i32;
        let wall = v.iter().any(|&c| c == 0 || c == n - 1);
        let pillar = boxes
            .iter()
            .any(|&(x, y, s)| v[0] >= x && v[0] < x + s && v[1] >= y && v[1] < y + s);
        g.set_occupancy(
            v,
            if wall || pillar {
                Occupancy::Occupied
            } else {
                Occupancy::Free
            },
        );
    }
    g.compute_esdf(&g.full_aabb());
    g
}

/// Independent full-grid node extraction: lattice local maxima (at least
/// every neighbour), clear 3x3x3 surroundings, greedy spacing in ascending
/// lattice order.
pub fn reference_nodes(grid: &VoxelGrid, params: &GraphParams) -> Vec<[i32; 3]> {
    let n = params.downsample as i32;
    let dims = grid.dims();
    let cells: Vec<i32> = dims
        .iter()
        .map(|&d| {
            let mut c = 0;
            while c * n + n / 2 < d as i32 {
                c += 1;
            }
            c
        })
        .collect();
    let value = |c: [i32; 3]| -> f32 {
        if (0..3).any(|a| c[a] < 0 || c[a] >= cells[a]) {
            return f32::NEG_INFINITY;
        }
        let v = [c[0] * n + n / 2, c[1] * n + n / 2, c[2] * n + n / 2];
        grid.esdf(v).unwrap_or(f32::NEG_INFINITY)
    };
    let mut kept: Vec<Vec3> = Vec::new();
    let mut out = Vec::new();
    for cz in 0..cells[2] {
        for cy in 0..cells[1] {
            for cx in 0..cells[0] {
                let c = [cx, cy, cz];
                let e = value(c);
                if !(e > 0.0) {
                    continue;
                }
                let mut is_max = true;
                for dz in -1..=1 {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            if (dx, dy, dz) != (0, 0, 0) && value([cx + dx, cy + dy, cz + dz]) > e {
                                is_max = false;
                            }
                        }
                    }
                }
                if !is_max {
                    continue;
                }
                let v = [cx * n + n / 2, cy * n + n / 2, cz * n + n / 2];
                let mut clear = true;
                for dz in -1..=1 {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            if grid.occupancy([v[0] + dx, v[1] + dy, v[2] + dz])
                                != Some(Occupancy::Free)
                            {
                                clear = false;
                            }
                        }
                    }
                }
                if !clear {
                    continue;
                }
                let p = grid.center(v);
                if kept
                    .iter()
                    .any(|q| (q - p).norm() < params.min_node_distance - 1e-9)
                {
                    continue;
                }
                kept.push(p);
                out.push(v);
            }
        }
    }
    out
}

/// Skeleton node extraction over a full box against the reference scan.
pub fn skeleton_rescan_suite(instances: u64) -> Result<usize, String> {
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let grid = pillar_room(&mut rng, 20 + (seed as usize % 3) * 5, 1 + seed as usize % 3);
        let params = GraphParams::default();
        let mut sk = SkeletonGraph::new(params.clone()).unwrap();
        sk.update(&grid, &grid.full_aabb());
        let got: Vec<[i32; 3]> = sk.nodes().map(|n| n.voxel).collect();
        let want = reference_nodes(&grid, &params);
        if got != want {
            return Err(format!("skeleton instance {seed}: {got:?} vs oracle {want:?}"));
        }
        for e in sk.edges() {
            if e.length > params.max_edge_length {
                return Err(format!("skeleton instance {seed}: edge too long {e:?}"));
            }
        }
    }
    Ok(instances as usize)
}

/// Frontier assignment against an exhaustive nearest-visible-node scan.
pub fn assignment_suite(instances: u64) -> Result<usize, String> {
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
        let grid = pillar_room(&mut rng, 40, 4);
        let mut sk = SkeletonGraph::new(GraphParams::default()).unwrap();
        let mut placed = 0;
        while placed < 12 {
            let v = [
                rng.gen_range(1..39),
                rng.gen_range(1..39),
                rng.gen_range(1..39),
            ];
            if grid.occupancy(v) == Some(Occupancy::Free) {
                sk.insert_node(grid.center(v), v, 1.0);
                placed += 1;
            }
        }
        let mut clusters = Vec::new();
        for id in 1..=5u32 {
            let v = [
                rng.gen_range(1..39),
                rng.gen_range(1..39),
                rng.gen_range(1..39),
            ];
            let c = grid.center(v);
            clusters.push(FrontierCluster {
                id,
                cells: vec![v],
                centroid: [c.x, c.y, c.z],
                bbox: Aabb::new(v, v),
            });
        }
        let delta = sk.assign_frontiers(&clusters, &grid);
        let d_vis = sk.params().visibility_range;
        let mut want: BTreeMap<NodeId, BTreeSet<u32>> = BTreeMap::new();
        let mut orphans = Vec::new();
        for c in &clusters {
            let centroid = c.centroid();
            let mut cands: Vec<(f64, NodeId)> = sk
                .nodes()
                .map(|n| ((n.position - centroid).norm(), n.id))
                .filter(|(d, _)| *d <= d_vis)
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            match cands
                .iter()
                .find(|(_, id)| grid.line_of_sight(&sk.node(*id).unwrap().position, &centroid))
            {
                Some((_, id)) => {
                    want.entry(*id).or_default().insert(c.id);
                }
                None => orphans.push(c.id),
            }
        }
        for n in sk.nodes() {
            let expect = want.get(&n.id).cloned().unwrap_or_default();
            if n.assigned_frontiers != expect || n.activated != !expect.is_empty() {
                return Err(format!(
                    "assignment instance {seed}: node {} has {:?}, oracle {:?}",
                    n.id, n.assigned_frontiers, expect
                ));
            }
        }
        if delta.orphans != orphans {
            return Err(format!("assignment instance {seed}: orphans differ"));
        }
    }
    Ok(instances as usize)
}

// ---------------------------------------------------------------- planner

fn region(id: usize, members: Vec<NodeId>) -> Region {
    Region {
        id,
        members,
        probes: vec![],
        n_ext: 0,
        d_avg: [0.0; 8],
        s_iso: 1.0,
    }
}

/// Cost matrix and entry-node selection against Floyd-Warshall scans.
pub fn matrix_suite(instances: u64) -> Result<usize, String> {
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let g = random_graph(&mut rng, 24, 0.12);
        let dist = floyd(&g, false);
        let mut pool: Vec<u32> = (1..24).collect();
        let mut regions = Vec::new();
        for id in 0..4 {
            let k = rng.gen_range(1..=3);
            let mut members = Vec::new();
            for _ in 0..k {
                let i = rng.gen_range(0..pool.len());
                members.push(NodeId(pool.remove(i)));
            }
            members.sort_unstable();
            regions.push(region(id, members));
        }
        let v_cur = NodeId(0);
        let m = build_cost_matrix(&regions, &g, v_cur).map_err(|e| e.to_string())?;
        let min_between = |a: &[NodeId], b: &[NodeId]| {
            let mut best = f64::INFINITY;
            for x in a {
                for y in b {
                    best = best.min(dist[x.0 as usize][y.0 as usize]);
                }
            }
            best
        };
        for i in 0..=regions.len() {
            for j in 0..=regions.len() {
                let want = if i == j {
                    0.0
                } else {
                    let a: Vec<NodeId> = if i == 0 { vec![v_cur] } else { regions[i - 1].members.clone() };
                    let b: Vec<NodeId> = if j == 0 { vec![v_cur] } else { regions[j - 1].members.clone() };
                    min_between(&a, &b)
                };
                if !close(m.get(i, j), want) {
                    return Err(format!(
                        "matrix instance {seed}: C[{i}][{j}] = {}, oracle {want}",
                        m.get(i, j)
                    ));
                }
                if m.get(i, j) != m.get(j, i) {
                    return Err(format!("matrix instance {seed}: asymmetric at {i},{j}"));
                }
            }
        }
        let tour = solve_tsp(&m).map_err(|e| e.to_string())?;
        match next_global_target(&tour, &regions, &g, v_cur) {
            Ok((r, v)) => {
                let members = &regions[r].members;
                let best = members
                    .iter()
                    .map(|x| (dist[0][x.0 as usize], *x))
                    .filter(|(d, _)| d.is_finite())
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|x| x.1);
                if Some(v) != best || Some(&(r + 1)) != tour.order.first() {
                    return Err(format!("matrix instance {seed}: entry node {v} vs {best:?}"));
                }
            }
            Err(_) => {
                if !tour.order.is_empty() {
                    return Err(format!("matrix instance {seed}: unexpected stall"));
                }
            }
        }
    }
    Ok(instances as usize)
}
