//! Generated worlds: connectivity by an independent flood fill, determinism
//! and the explicit-layout round trip.

use std::collections::VecDeque;

use skelex_sim::bench::export_generated;
use skelex_sim::env::{generate_environment, EnvKind, GeneratorOptions, GroundTruthEnv};

/// Free voxels 6-connected to the start, by breadth-first search.
fn flood(env: &GroundTruthEnv) -> usize {
    let [nx, ny, nz] = env.dims();
    let idx = |v: [i32; 3]| v[0] as usize + nx * (v[1] as usize + ny * v[2] as usize);
    let mut seen = vec![false; nx * ny * nz];
    let s = env.voxel_of(&env.start());
    let mut queue = VecDeque::from([s]);
    seen[idx(s)] = true;
    let mut count = 0;
    while let Some(v) = queue.pop_front() {
        count += 1;
        for d in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
            let w = [v[0] + d[0], v[1] + d[1], v[2] + d[2]];
            if env.in_bounds(w) && !env.is_solid(w) && !seen[idx(w)] {
                seen[idx(w)] = true;
                queue.push_back(w);
            }
        }
    }
    count
}

#[test]
fn every_free_voxel_reachable_from_start() {
    for kind in [EnvKind::Office, EnvKind::Maze, EnvKind::Tunnel] {
        for seed in 0..6 {
            let env = generate_environment(kind, [12.0, 12.0, 2.5], seed, 0.1, &GeneratorOptions::default())
                .unwrap();
            assert!(!env.solid_at(&env.start()));
            assert_eq!(flood(&env), env.free_count(), "{kind} seed {seed}");
            let mask = env.reachable_mask();
            assert_eq!(mask.iter().filter(|r| **r).count(), env.free_count());
        }
    }
}

#[test]
fn same_seed_same_world() {
    for kind in [EnvKind::Office, EnvKind::Maze, EnvKind::Tunnel] {
        let a = generate_environment(kind, [10.0, 10.0, 2.5], 7, 0.1, &GeneratorOptions::default()).unwrap();
        let b = generate_environment(kind, [10.0, 10.0, 2.5], 7, 0.1, &GeneratorOptions::default()).unwrap();
        assert_eq!(a.solid_mask(), b.solid_mask());
        assert_eq!(a.layout, b.layout);
    }
}

#[test]
fn exported_layout_rasterizes_identically() {
    let scenario = export_generated("office", EnvKind::Office, [12.0, 12.0, 2.5], 3, 0.1).unwrap();
    let text = serde_json::to_string_pretty(&scenario).unwrap();
    let back = skelex_sim::Scenario::from_json(&text).unwrap();
    let original = generate_environment(EnvKind::Office, [12.0, 12.0, 2.5], 3, 0.1, &GeneratorOptions::default())
        .unwrap();
    let rebuilt = back.build_env(0.1, 0).unwrap();
    assert_eq!(rebuilt.solid_mask(), original.solid_mask());
    assert_eq!(rebuilt.start(), original.start());
}
