//! Multi-seed benchmarks, ablation tables and scenario export.
//!
//! Every run writes its artifacts to `<out>/<scenario>/<variant>/seed-<n>/`
//! as soon as it finishes, so an aborted benchmark keeps what it produced.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::env::{generate_environment, EnvKind, GeneratorOptions};
use crate::error::{Result, SimError};
use crate::explore::{run_exploration, AblationFlags};
use crate::metrics::{Phase, RunOutput, Stats};
use crate::scenario::{EnvSpec, Scenario};
use crate::sensor::SensorConfig;

pub const SUMMARY_HEADER: &str = "scenario,variant,runs,complete,\
exploration_time_avg,exploration_time_std,compute_ms_avg,compute_ms_std,\
flight_speed_avg,flight_speed_std,path_length_avg,path_length_std,\
coverage_avg,coverage_std,reachable_coverage_avg,reachable_coverage_std,\
rsp_invocations_avg,rsp_invocations_std,cycles_avg,cycles_std";

pub const ABLATION_HEADER: &str = "variant,runs,exploration_time_avg,exploration_time_std,\
compute_ms_avg,compute_ms_std,time_ratio,compute_ratio";

/// One finished run, reduced to the benchmarked quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    pub phase: Phase,
    pub exploration_time: f64,
    /// Mean planner wall time per cycle (ms), frontier detection excluded.
    pub compute_ms: f64,
    pub compute_ms_max: f64,
    pub flight_speed: f64,
    pub path_length: f64,
    pub coverage: f64,
    pub reachable_coverage: f64,
    pub rsp_invocations: u64,
    pub cycles: u64,
    /// Directory holding the run's artifacts, relative to the output root.
    pub dir: String,
}

impl RunRow {
    fn of(out: &RunOutput, dir: String) -> Self {
        let m = &out.metrics;
        Self {
            scenario: m.scenario.clone(),
            variant: m.variant.clone(),
            seed: m.seed,
            phase: m.status.phase,
            exploration_time: m.exploration_time,
            compute_ms: out.timing.planner_ms.mean,
            compute_ms_max: out.timing.planner_ms.max,
            flight_speed: m.flight_speed,
            path_length: m.path_length,
            coverage: m.coverage,
            reachable_coverage: m.reachable_coverage,
            rsp_invocations: m.rsp_invocations,
            cycles: m.cycles,
            dir,
        }
    }
}

/// Avg/std over the seeds of one (scenario, variant) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub variant: String,
    pub seeds: Vec<u64>,
    pub complete: usize,
    pub exploration_time: Stats,
    pub compute_ms: Stats,
    pub flight_speed: Stats,
    pub path_length: Stats,
    pub coverage: Stats,
    pub reachable_coverage: Stats,
    pub rsp_invocations: Stats,
    pub cycles: Stats,
}

impl SummaryRow {
    pub fn of(rows: &[&RunRow]) -> Self {
        let col = |f: &dyn Fn(&RunRow) -> f64| Stats::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
        Self {
            scenario: rows[0].scenario.clone(),
            variant: rows[0].variant.clone(),
            seeds: rows.iter().map(|r| r.seed).collect(),
            complete: rows.iter().filter(|r| r.phase == Phase::Complete).count(),
            exploration_time: col(&|r| r.exploration_time),
            compute_ms: col(&|r| r.compute_ms),
            flight_speed: col(&|r| r.flight_speed),
            path_length: col(&|r| r.path_length),
            coverage: col(&|r| r.coverage),
            reachable_coverage: col(&|r| r.reachable_coverage),
            rsp_invocations: col(&|r| r.rsp_invocations as f64),
            cycles: col(&|r| r.cycles as f64),
        }
    }

    fn csv_line(&self) -> String {
        let mut fields = vec![
            self.scenario.clone(),
            self.variant.clone(),
            self.seeds.len().to_string(),
            self.complete.to_string(),
        ];
        for s in [
            &self.exploration_time,
            &self.compute_ms,
            &self.flight_speed,
            &self.path_length,
            &self.coverage,
            &self.reachable_coverage,
            &self.rsp_invocations,
            &self.cycles,
        ] {
            fields.push(s.mean.to_string());
            fields.push(s.std.to_string());
        }
        fields.join(",")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunRow>,
}

impl BenchSummary {
    /// Groups runs by (scenario, variant) in first-seen order.
    pub fn from_runs(runs: Vec<RunRow>) -> Self {
        let mut keys: Vec<(String, String)> = Vec::new();
        for r in &runs {
            let k = (r.scenario.clone(), r.variant.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let rows = keys
            .iter()
            .map(|(s, v)| {
                let group: Vec<&RunRow> = runs.iter().filter(|r| &r.scenario == s && &r.variant == v).collect();
                SummaryRow::of(&group)
            })
            .collect();
        Self { rows, runs }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(SUMMARY_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.csv_line());
            s.push('\n');
        }
        s
    }

    /// Writes summary.csv and summary.json into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        let csv = dir.join("summary.csv");
        fs::write(&csv, self.to_csv()).map_err(|e| SimError::io(&csv, e))?;
        let json = dir.join("summary.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| SimError::json(&json, e))?;
        fs::write(&json, text).map_err(|e| SimError::io(&json, e))
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub seeds: Vec<u64>,
    pub variants: Vec<AblationFlags>,
    /// Concurrent runs; 0 uses one per core.
    pub jobs: usize,
    pub out: PathBuf,
}

struct Job<'a> {
    scenario: &'a Scenario,
    flags: AblationFlags,
    seed: u64,
}

fn run_dir(scenario: &Scenario, flags: &AblationFlags, seed: u64) -> String {
    format!("{}/{}/seed-{seed}", scenario.name, flags.slug())
}

/// Runs every (scenario, variant, seed) triple and writes the summary.
///
/// Inputs are validated before any run starts. When a run fails the
/// remaining runs are skipped, the summary of the finished ones is still
/// written and the error is returned.
pub fn run_bench(scenarios: &[Scenario], cfg: &RunConfig, opts: &BenchOptions) -> Result<BenchSummary> {
    if scenarios.is_empty() {
        return Err(SimError::Config("no scenarios given".into()));
    }
    if opts.seeds.len() < 2 {
        return Err(SimError::Config(format!(
            "a benchmark needs at least 2 seeds, got {}",
            opts.seeds.len()
        )));
    }
    if opts.variants.is_empty() {
        return Err(SimError::Config("no variants given".into()));
    }
    cfg.validate()?;
    let mut names = Vec::new();
    for s in scenarios {
        s.validate()?;
        if names.contains(&&s.name) {
            return Err(SimError::Scenario(format!("duplicate scenario name `{}`", s.name)));
        }
        names.push(&s.name);
    }

    let mut jobs = Vec::new();
    for scenario in scenarios {
        for flags in &opts.variants {
            for &seed in &opts.seeds {
                jobs.push(Job {
                    scenario,
                    flags: *flags,
                    seed,
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| SimError::Config(format!("cannot start {} workers: {e}", opts.jobs)))?;
    let failed = std::sync::atomic::AtomicBool::new(false);
    let results: Vec<Option<Result<RunRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                if failed.load(std::sync::atomic::Ordering::Relaxed) {
                    return None;
                }
                let res = run_exploration(job.scenario, cfg, job.flags, job.seed).and_then(|out| {
                    let rel = run_dir(job.scenario, &job.flags, job.seed);
                    out.write_to(&opts.out.join(&rel))?;
                    Ok(RunRow::of(&out, rel))
                });
                if res.is_err() {
                    failed.store(true, std::sync::atomic::Ordering::Relaxed);
                }
                Some(res)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_err = None;
    for r in results.into_iter().flatten() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let summary = BenchSummary::from_runs(rows);
    summary.write_to(&opts.out)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

/// One line of the ablation table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub runs: usize,
    pub exploration_time: Stats,
    pub compute_ms: Stats,
    /// Mean exploration time relative to the baseline.
    pub time_ratio: f64,
    /// Mean per-cycle compute relative to the baseline.
    pub compute_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub scenario: String,
    pub seeds: Vec<u64>,
    /// Baseline first, then the variants in the order requested.
    pub rows: Vec<AblationRow>,
    pub summary: BenchSummary,
}

impl AblationTable {
    pub fn row(&self, variant: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(ABLATION_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.variant,
                r.runs,
                r.exploration_time.mean,
                r.exploration_time.std,
                r.compute_ms.mean,
                r.compute_ms.std,
                r.time_ratio,
                r.compute_ratio
            ));
        }
        s
    }

    /// Writes ablation.csv and ablation.json into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        let csv = dir.join("ablation.csv");
        fs::write(&csv, self.to_csv()).map_err(|e| SimError::io(&csv, e))?;
        let json = dir.join("ablation.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| SimError::json(&json, e))?;
        fs::write(&json, text).map_err(|e| SimError::io(&json, e))
    }
}

/// Parses variant names (`pir`, `rsp`, `pp`), dropping repeats and blanks.
pub fn parse_variants(names: &[String]) -> Result<Vec<AblationFlags>> {
    let mut out: Vec<AblationFlags> = Vec::new();
    for n in names.iter().map(|n| n.trim()).filter(|n| !n.is_empty()) {
        let f = AblationFlags::without(n)?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// Runs the baseline and each single-component variant over `seeds`.
pub fn run_ablation(
    scenario: &Scenario,
    cfg: &RunConfig,
    seeds: &[u64],
    variants: &[AblationFlags],
    jobs: usize,
    out: &Path,
) -> Result<AblationTable> {
    let mut all = vec![AblationFlags::PROPOSED];
    all.extend(variants.iter().copied().filter(|f| *f != AblationFlags::PROPOSED));
    let opts = BenchOptions {
        seeds: seeds.to_vec(),
        variants: all.clone(),
        jobs,
        out: out.to_path_buf(),
    };
    let summary = run_bench(std::slice::from_ref(scenario), cfg, &opts)?;
    let base = &summary.rows[0];
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
    let rows = summary
        .rows
        .iter()
        .map(|r| AblationRow {
            variant: r.variant.clone(),
            runs: r.seeds.len(),
            exploration_time: r.exploration_time,
            compute_ms: r.compute_ms,
            time_ratio: ratio(r.exploration_time.mean, base.exploration_time.mean),
            compute_ratio: ratio(r.compute_ms.mean, base.compute_ms.mean),
        })
        .collect();
    let table = AblationTable {
        scenario: scenario.name.clone(),
        seeds: seeds.to_vec(),
        rows,
        summary,
    };
    table.write_to(out)?;
    Ok(table)
}

/// A scenario that embeds a generated world as an explicit obstacle list.
pub fn export_generated(
    name: &str,
    kind: EnvKind,
    size: [f64; 3],
    seed: u64,
    voxel_size: f64,
) -> Result<Scenario> {
    let env = generate_environment(kind, size, seed, voxel_size, &GeneratorOptions::default())?;
    let scenario = Scenario {
        name: name.to_string(),
        environment: EnvSpec::Explicit { layout: env.layout },
        sensor: SensorConfig::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: u64, t: f64) -> RunRow {
        RunRow {
            scenario: "s".into(),
            variant: "Proposed".into(),
            seed,
            phase: Phase::Complete,
            exploration_time: t,
            compute_ms: 1.0,
            compute_ms_max: 2.0,
            flight_speed: 1.5,
            path_length: 10.0,
            coverage: 3.0,
            reachable_coverage: 1.0,
            rsp_invocations: 2,
            cycles: 10,
            dir: String::new(),
        }
    }

    #[test]
    fn constant_metric_has_zero_std() {
        let s = BenchSummary::from_runs(vec![row(1, 5.0), row(2, 5.0), row(3, 5.0)]);
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].exploration_time.std, 0.0);
        assert_eq!(s.rows[0].seeds, vec![1, 2, 3]);
    }

    #[test]
    fn csv_columns_match_header() {
        let s = BenchSummary::from_runs(vec![row(1, 4.0), row(2, 6.0)]);
        let csv = s.to_csv();
        let mut lines = csv.lines();
        let n = lines.next().unwrap().split(',').count();
        assert_eq!(lines.next().unwrap().split(',').count(), n);
    }

    #[test]
    fn variant_names() {
        let v = parse_variants(&["pp".into(), "pir".into(), "pp".into()]).unwrap();
        assert_eq!(v.len(), 2);
        assert!(parse_variants(&["sg".into()]).is_err());
    }
}
