//! Acceptance gate. Each test checks one criterion at its stated tolerance
//! and reports a single PASS/FAIL line on stderr.
//!
//! The closed-loop criteria share one campaign: office and maze worlds of
//! 12 x 12 x 2.5 m over seeds 1..=10, plus the maze ablation variants. It is
//! run once and its artifacts are read back from disk.

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skelex_core::planner::{initial_turn_time, position_cost, KinematicLimits, UavState};
use skelex_core::regions::isolation_score;
use skelex_core::Vec3;
use skelex_sim::bench::{run_ablation, run_bench, AblationTable, BenchOptions, BenchSummary};
use skelex_sim::env::EnvKind;
use skelex_sim::metrics::{metrics_json, CycleEvent, TimingRecord};
use skelex_sim::{run_exploration, AblationFlags, MetricsRecord, Phase, RunConfig, Scenario};

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const SIZE: [f64; 3] = [12.0, 12.0, 2.5];

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id} [{verdict}] {name}: {detail}");
}

struct Campaign {
    _dir: tempfile::TempDir,
    root: PathBuf,
    office: BenchSummary,
    maze: AblationTable,
}

fn scenario(kind: EnvKind) -> Scenario {
    Scenario::generated(&kind.to_string(), kind, SIZE)
}

fn campaign() -> &'static Campaign {
    static CAMPAIGN: OnceLock<Campaign> = OnceLock::new();
    CAMPAIGN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let cfg = RunConfig::default();
        let seeds: Vec<u64> = SEEDS.collect();
        let office = run_bench(
            &[scenario(EnvKind::Office)],
            &cfg,
            &BenchOptions {
                seeds: seeds.clone(),
                variants: vec![AblationFlags::PROPOSED],
                jobs: 0,
                out: root.join("office"),
            },
        )
        .unwrap();
        let variants = [AblationFlags::without("pp").unwrap(), AblationFlags::without("rsp").unwrap()];
        let maze = run_ablation(&scenario(EnvKind::Maze), &cfg, &seeds, &variants, 0, &root.join("maze")).unwrap();
        Campaign {
            _dir: dir,
            root,
            office,
            maze,
        }
    })
}

/// Every run of the campaign as (artifact directory, variant label).
fn run_dirs(c: &Campaign) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    for r in &c.office.runs {
        out.push((c.root.join("office").join(&r.dir), r.variant.clone()));
    }
    for r in &c.maze.summary.runs {
        out.push((c.root.join("maze").join(&r.dir), r.variant.clone()));
    }
    out
}

fn read_metrics(dir: &Path) -> (String, MetricsRecord) {
    let text = std::fs::read_to_string(dir.join("metrics.json")).unwrap();
    let m = serde_json::from_str(&text).unwrap();
    (text, m)
}

fn read_timing(dir: &Path) -> TimingRecord {
    serde_json::from_str(&std::fs::read_to_string(dir.join("timing.json")).unwrap()).unwrap()
}

fn read_events(dir: &Path) -> Vec<CycleEvent> {
    std::fs::read_to_string(dir.join("events.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn criterion_1_oracle_suites() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let suites: [(&str, Box<dyn Fn() -> Result<usize, String>>); 4] = [
        ("esdf", Box::new(|| oracles::esdf_suite(0..100))),
        ("distances", Box::new(|| oracles::distance_suite(20, 50))),
        ("clustering", Box::new(|| oracles::clustering_suite(30))),
        ("intersections", Box::new(|| oracles::intersection_suite(30))),
    ];
    let mut counts = Vec::new();
    for (name, suite) in suites.iter() {
        match suite() {
            Ok(n) => counts.push(format!("{name} {n}")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    let detail = if failures.is_empty() {
        format!("{} cases in {secs:.1} s", counts.join(", "))
    } else {
        failures.join("; ")
    };
    report(1, "oracle suites", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_2_time_cost_closed_forms() {
    let limits = KinematicLimits {
        v_max: 2.0,
        a_max: 2.0,
        v_z_max: 2.0,
        omega_max: 1.57,
    };
    let x = Vec3::x();
    let t_cruise = initial_turn_time(&Vec3::new(2.0, 0.0, 0.0), &x, &limits);
    let t_rest = initial_turn_time(&Vec3::zeros(), &x, &limits);
    let t_back = initial_turn_time(&Vec3::new(-1.0, 0.0, 0.0), &x, &limits);
    let state = UavState {
        velocity: Vec3::new(2.0, 0.0, 0.0),
        ..UavState::at_rest(Vec3::new(0.0, 0.0, 1.0), 0.0)
    };
    let c = position_cost(&state, &[state.position, Vec3::new(4.0, 0.0, 1.0)], 1.0, &limits)
        .unwrap()
        .total;
    let checks = [(t_cruise, 0.0), (t_rest, 0.5), (t_back, 1.125), (c, 2.0)];
    let pass = checks.iter().all(|(got, want)| (got - want).abs() <= 1e-9);
    let detail = format!("t_init(2)={t_cruise}, t_init(0)={t_rest}, t_init(-1)={t_back}, C_pos(4 m)={c}");
    report(2, "time-cost closed forms", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_3_isolation_score() {
    let unit = isolation_score(0, 0.0, 0.5, 0.2);
    let third = isolation_score(2, 5.0, 0.5, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut monotone = true;
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.01..2.0);
        let beta = rng.gen_range(0.0..2.0);
        let norm = rng.gen_range(0.0..40.0);
        let n = rng.gen_range(0..50usize);
        let a = isolation_score(n, norm, alpha, beta);
        let b = isolation_score(n + 1, norm, alpha, beta);
        monotone &= b < a && a > 0.0 && a <= 1.0;
    }
    let pass = unit == 1.0 && third == 1.0 / 3.0 && monotone;
    let detail = format!("S(0,0)={unit}, S(2,5)={third}, monotone over 1000 draws: {monotone}");
    report(3, "isolation score", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_4_tsp_quality() {
    let result = oracles::tsp_suite(100);
    let pass = matches!(result, Ok(w) if w <= 1.05);
    let detail = match &result {
        Ok(w) => format!("worst cost ratio {w:.6} over 100 instances, tours repeatable"),
        Err(e) => e.clone(),
    };
    report(4, "TSP quality and determinism", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_5_closed_loop_coverage() {
    let c = campaign();
    let mut bad = Vec::new();
    let mut worst_cov: f64 = 1.0;
    let mut worst_wall: f64 = 0.0;
    let mut n = 0;
    for (dir, variant) in run_dirs(c) {
        if variant != "Proposed" {
            continue;
        }
        n += 1;
        let (_, m) = read_metrics(&dir);
        let wall = read_timing(&dir).wall_s;
        worst_cov = worst_cov.min(m.reachable_coverage);
        worst_wall = worst_wall.max(wall);
        if m.status.phase != Phase::Complete || m.reachable_coverage < 0.95 || m.exploration_time > 600.0 || wall >= 300.0
        {
            bad.push(format!(
                "{} seed {}: {:?} coverage {:.3} in {:.1} s ({:.1} s wall)",
                m.scenario, m.seed, m.status.phase, m.reachable_coverage, m.exploration_time, wall
            ));
        }
    }
    let pass = bad.is_empty() && n == 20;
    let detail = if pass {
        format!("{n} runs Complete, min reachable coverage {worst_cov:.4}, max wall {worst_wall:.1} s")
    } else {
        bad.join("; ")
    };
    report(5, "closed-loop coverage", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_6_safety_and_determinism() {
    let c = campaign();
    let mut violations = 0;
    let mut runs = 0;
    for (dir, _) in run_dirs(c) {
        violations += read_metrics(&dir).1.clearance_violations;
        runs += 1;
    }
    let cfg = RunConfig::default();
    let mut identical = true;
    for (kind, sub) in [(EnvKind::Office, "office"), (EnvKind::Maze, "maze")] {
        let dir = c.root.join(sub).join(format!("{kind}/proposed/seed-1"));
        let (stored, _) = read_metrics(&dir);
        let again = run_exploration(&scenario(kind), &cfg, AblationFlags::PROPOSED, 1).unwrap();
        identical &= metrics_json(&again.metrics) == stored;
    }
    let pass = violations == 0 && identical;
    let detail = format!("{violations} clearance violations over {runs} runs; rerun metrics byte-identical: {identical}");
    report(6, "safety and determinism", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_7_ablation_direction() {
    let t = &campaign().maze;
    let base = t.row("Proposed").unwrap();
    let no_pp = t.row("w/o PP").unwrap();
    let no_rsp = t.row("w/o RSP").unwrap();
    let compute_ok = no_pp.compute_ms.mean >= 2.0 * base.compute_ms.mean;
    let time_ok = no_rsp.exploration_time.mean >= 1.05 * base.exploration_time.mean;
    let pass = compute_ok && time_ok;
    let detail = format!(
        "compute w/o PP {:.3} ms vs Proposed {:.3} ms (x{:.2}, need >= 2); time w/o RSP {:.1} s vs {:.1} s (x{:.3}, need >= 1.05)",
        no_pp.compute_ms.mean,
        base.compute_ms.mean,
        no_pp.compute_ratio,
        no_rsp.exploration_time.mean,
        base.exploration_time.mean,
        no_rsp.time_ratio
    );
    report(7, "ablation direction", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_8_on_demand_sequencing() {
    let c = campaign();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (dir, variant) in run_dirs(c) {
        if variant != "Proposed" {
            continue;
        }
        let (_, m) = read_metrics(&dir);
        let events = read_events(&dir);
        let rsp = events.iter().filter(|e| e.rsp_invoked).count();
        let share = rsp as f64 / events.len().max(1) as f64;
        worst = worst.max(share);
        if share >= 0.3 {
            bad.push(format!("{} seed {}: {rsp}/{} cycles", m.scenario, m.seed, events.len()));
        }
        if rsp as u64 != m.rsp_invocations || events.len() as u64 != m.cycles {
            bad.push(format!("{} seed {}: log and metrics disagree", m.scenario, m.seed));
        }
        for e in events.iter().filter(|e| e.rsp_invoked) {
            if !e.pp_attempted || e.pp_found {
                bad.push(format!("{} seed {} cycle {}: no proximal miss", m.scenario, m.seed, e.cycle));
            }
        }
    }
    let pass = bad.is_empty();
    let detail = if pass {
        format!("max sequencer share {:.1}% of cycles, every call after a proximal miss", worst * 100.0)
    } else {
        bad.join("; ")
    };
    report(8, "on-demand sequencing", pass, &detail);
    assert!(pass, "{detail}");
}
