//! Per-run records and their on-disk forms.
//!
//! `metrics.json` holds only simulated quantities and is bit-for-bit
//! reproducible. Wall-clock measurements live in `timing.json`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use skelex_core::planner::CostBreakdown;
use skelex_core::regions::RegionRecord;
use skelex_core::skeleton::NodeId;

use crate::error::{Result, SimError};
use crate::motion::PlanSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Running,
    Complete,
    Stalled,
    TimedOut,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationStatus {
    pub phase: Phase,
    /// Simulated time (s).
    pub sim_time: f64,
    pub cycles: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub scenario: String,
    pub seed: u64,
    pub variant: String,
    pub status: ExplorationStatus,
    /// Simulated time until termination (s).
    pub exploration_time: f64,
    pub path_length: f64,
    /// Path length over exploration time (m/s).
    pub flight_speed: f64,
    /// Volume of voxels that became known (m^3).
    pub coverage: f64,
    /// Known fraction of the free voxels reachable from the start.
    pub reachable_coverage: f64,
    pub reachable_free_voxels: usize,
    pub cycles: u64,
    pub pp_invocations: u64,
    pub pp_successes: u64,
    pub rsp_invocations: u64,
    pub greedy_invocations: u64,
    /// Cycles that repaired the skeleton through known free space.
    pub bridge_invocations: u64,
    /// Steps at which the vehicle lacked ground-truth clearance.
    pub clearance_violations: u64,
    pub blacklisted_cells: usize,
    /// Frontier clusters no node could see at the end.
    pub orphan_clusters: usize,
    /// `[t, coverage]` samples, one per simulated second plus the final state.
    pub coverage_series: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            mean,
            std,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Wall-clock costs in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    /// Target selection per cycle: proximal search, sequencing and routing.
    pub planner_ms: Stats,
    /// ESDF and skeleton maintenance per cycle.
    pub mapping_ms: Stats,
    /// Frontier assignment and region analysis per cycle.
    pub regions_ms: Stats,
    /// Frontier detection per cycle, reported separately.
    pub frontier_ms: Stats,
    /// Sum of the above except frontier detection, per cycle.
    pub pipeline_ms: Stats,
    /// Cycles in which the sequencer ran.
    pub rsp_cycle_planner_ms: Stats,
    pub per_cycle_planner_ms: Vec<f64>,
    pub wall_s: f64,
}

/// One line of `events.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleEvent {
    pub cycle: u64,
    pub t: f64,
    pub trigger: String,
    pub pp_attempted: bool,
    pub pp_found: bool,
    pub pp_candidates: usize,
    pub rsp_invoked: bool,
    pub greedy_invoked: bool,
    pub bridge_invoked: bool,
    pub planner: Option<PlanSource>,
    pub target: Option<NodeId>,
    pub nodes: usize,
    pub edges: usize,
    pub activated: usize,
    pub clusters: usize,
    pub orphans: usize,
    pub regions: usize,
    pub unknown_voxels: usize,
    pub outcome: Phase,
}

/// One line of `plans.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub cycle: u64,
    pub t: f64,
    pub source: PlanSource,
    pub target: NodeId,
    pub waypoints: Vec<[f64; 3]>,
    pub yaw: f64,
    pub cost: Option<CostBreakdown>,
    /// Region ids in visiting order when the sequencer ran.
    pub tour: Option<Vec<usize>>,
    pub tour_cost: Option<f64>,
}

/// One line of `regions.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionsSnapshot {
    pub cycle: u64,
    pub t: f64,
    pub regions: Vec<RegionRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: [f64; 3],
    pub yaw: f64,
    pub speed: f64,
    pub planner: Option<PlanSource>,
}

pub const TRAJECTORY_HEADER: &str = "t,x,y,z,yaw,speed,planner";

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub metrics: MetricsRecord,
    pub timing: TimingRecord,
    pub trajectory: Vec<TrajectorySample>,
    pub events: Vec<CycleEvent>,
    pub plans: Vec<PlanRecord>,
    pub regions: Vec<RegionsSnapshot>,
}

pub fn metrics_json(m: &MetricsRecord) -> String {
    serde_json::to_string_pretty(m).expect("metrics serialize")
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| SimError::io(path, e))
}

fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(f);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| SimError::json(path, e))?;
        w.write_all(b"\n").map_err(|e| SimError::io(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

impl RunOutput {
    /// Writes metrics.json, timing.json, trajectory.csv, events.jsonl,
    /// regions.jsonl and plans.jsonl into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        write_file(&dir.join("metrics.json"), metrics_json(&self.metrics).as_bytes())?;
        let timing = serde_json::to_string_pretty(&self.timing).expect("timing serializes");
        write_file(&dir.join("timing.json"), timing.as_bytes())?;
        let mut csv = String::with_capacity(self.trajectory.len() * 48);
        csv.push_str(TRAJECTORY_HEADER);
        csv.push('\n');
        for s in &self.trajectory {
            csv.push_str(&format!(
                "{:.3},{:.4},{:.4},{:.4},{:.4},{:.4},{}\n",
                s.t,
                s.position[0],
                s.position[1],
                s.position[2],
                s.yaw,
                s.speed,
                s.planner.map_or("none", |p| p.as_str())
            ));
        }
        write_file(&dir.join("trajectory.csv"), csv.as_bytes())?;
        write_lines(&dir.join("events.jsonl"), &self.events)?;
        write_lines(&dir.join("regions.jsonl"), &self.regions)?;
        write_lines(&dir.join("plans.jsonl"), &self.plans)
    }
}
