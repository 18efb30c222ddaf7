//! The closed exploration loop.
//!
//! Each simulation step moves the vehicle, checks ground-truth clearance and,
//! every sense period, integrates a depth scan. A planning cycle runs when
//! there is no plan, when the target's frontier cells are all resolved, when
//! the viewpoint is reached, or when the watchdog sees no progress. A cycle
//! updates the ESDF, skeleton, frontiers and regions, then asks the proximal
//! planner for a nearby target; only when it finds none does the region
//! sequencer pick the next region to route to.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use skelex_core::geometry::{bearing, wrap_angle};
use skelex_core::grid_map::frontier::is_frontier_cell;
use skelex_core::grid_map::{Aabb, FrontierCluster, FrontierMap, Occupancy, VoxelGrid, VoxelIndex};
use skelex_core::planner::{
    build_cost_matrix, find_proximal_target, next_global_target, refine_yaw, solve_tsp,
    start_nodes, viewpoint_for_node, CostBreakdown, KinematicLimits, ProximalParams, UavState,
};
use skelex_core::regions::{analyze, RegionAnalysis, RegionParams};
use skelex_core::skeleton::{NodeId, SkeletonGraph};
use skelex_core::Vec3;

use crate::config::RunConfig;
use crate::env::GroundTruthEnv;
use crate::error::{Result, SimError};
use crate::metrics::{
    CycleEvent, ExplorationStatus, MetricsRecord, Phase, PlanRecord, RegionsSnapshot, RunOutput,
    Stats, TimingRecord, TrajectorySample,
};
use crate::motion::{Follower, MotionPlan, PlanSource};
use crate::scenario::Scenario;
use crate::sensor::DepthSensor;

/// Which planner components are switched off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationFlags {
    /// Select among all candidates instead of isolated regions first.
    pub disable_pir: bool,
    /// Replace the region sequencer with the nearest activated node.
    pub disable_rsp: bool,
    /// Skip the proximal planner and sequence regions every cycle.
    pub disable_pp: bool,
}

impl AblationFlags {
    pub const PROPOSED: AblationFlags = AblationFlags {
        disable_pir: false,
        disable_rsp: false,
        disable_pp: false,
    };

    /// Single-component variant by short name: `pir`, `rsp` or `pp`.
    pub fn without(component: &str) -> Result<Self> {
        let mut f = Self::default();
        match component {
            "pir" => f.disable_pir = true,
            "rsp" => f.disable_rsp = true,
            "pp" => f.disable_pp = true,
            other => {
                return Err(SimError::Config(format!(
                    "unknown variant `{other}` (expected pir, rsp or pp)"
                )))
            }
        }
        Ok(f)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.disable_pir {
            parts.push("w/o PIR");
        }
        if self.disable_rsp {
            parts.push("w/o RSP");
        }
        if self.disable_pp {
            parts.push("w/o PP");
        }
        if parts.is_empty() {
            "Proposed".to_string()
        } else {
            parts.join(", ")
        }
    }

    /// Directory-safe form of [`label`](Self::label).
    pub fn slug(&self) -> String {
        let mut parts = Vec::new();
        if self.disable_pir {
            parts.push("no-pir");
        }
        if self.disable_rsp {
            parts.push("no-rsp");
        }
        if self.disable_pp {
            parts.push("no-pp");
        }
        if parts.is_empty() {
            "proposed".to_string()
        } else {
            parts.join("-")
        }
    }
}

/// Why a cycle was started.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trigger {
    Start,
    Resolved,
    Reached,
    Watchdog,
}

impl Trigger {
    fn as_str(self) -> &'static str {
        match self {
            Trigger::Start => "start",
            Trigger::Resolved => "resolved",
            Trigger::Reached => "reached",
            Trigger::Watchdog => "watchdog",
        }
    }
}

/// The plan currently being flown and what it is meant to observe.
struct ActiveTarget {
    follower: Follower,
    /// Frontier cells the target was chosen for.
    cells: Vec<VoxelIndex>,
}

struct Timers {
    planner: Vec<f64>,
    mapping: Vec<f64>,
    regions: Vec<f64>,
    frontier: Vec<f64>,
    pipeline: Vec<f64>,
    rsp_planner: Vec<f64>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Closed-loop simulator state for one run.
pub struct Explorer {
    cfg: RunConfig,
    flags: AblationFlags,
    seed: u64,
    scenario_name: String,
    env: GroundTruthEnv,
    sensor: DepthSensor,
    grid: VoxelGrid,
    skeleton: SkeletonGraph,
    frontiers: FrontierMap,
    limits: KinematicLimits,
    region_params: RegionParams,
    proximal: ProximalParams,
    reachable: Vec<bool>,

    state: UavState,
    /// Position the take-off climb ends at.
    start: Vec3,
    t: f64,
    step: u64,
    active: Option<ActiveTarget>,
    esdf_dirty: Aabb,
    frontier_dirty: Aabb,
    /// Fruitless visits per frontier voxel (linear index).
    failures: BTreeMap<usize, u32>,
    blacklist: BTreeSet<usize>,
    last_unknown: usize,
    last_progress_t: f64,

    cycles: u64,
    pp_invocations: u64,
    pp_successes: u64,
    rsp_invocations: u64,
    greedy_invocations: u64,
    bridge_invocations: u64,
    violations: u64,
    path_length: f64,
    orphans: usize,
    coverage_series: Vec<[f64; 2]>,
    next_coverage_sample: f64,
    trajectory: Vec<TrajectorySample>,
    events: Vec<CycleEvent>,
    plans: Vec<PlanRecord>,
    region_log: Vec<RegionsSnapshot>,
    timers: Timers,
}

/// Runs one exploration to completion, stall or timeout.
pub fn run_exploration(
    scenario: &Scenario,
    cfg: &RunConfig,
    flags: AblationFlags,
    seed: u64,
) -> Result<RunOutput> {
    let started = Instant::now();
    let mut ex = Explorer::new(scenario, cfg, flags, seed)?;
    let phase = ex.run()?;
    Ok(ex.finish(phase, started))
}

impl Explorer {
    pub fn new(scenario: &Scenario, cfg: &RunConfig, flags: AblationFlags, seed: u64) -> Result<Self> {
        cfg.validate()?;
        scenario.validate()?;
        let env = scenario.build_env(cfg.voxel_size, seed)?;
        let sensor = DepthSensor::new(scenario.sensor.clone())?;
        let start = env.start();
        if !env.clear_at(&start, cfg.r_edge) {
            return Err(SimError::Scenario(format!(
                "start {:?} lacks {} m clearance",
                env.layout.start, cfg.r_edge
            )));
        }
        let mut grid = VoxelGrid::new(Vec3::zeros(), cfg.voxel_size, env.dims(), cfg.esdf_truncation)?;
        let skeleton = SkeletonGraph::new(cfg.graph_params())?;
        let frontiers = FrontierMap::new(&grid, cfg.frontier_max_cluster);
        let sc = &scenario.sensor;
        let proximal = cfg.proximal_params(
            sc.hfov_deg.to_radians(),
            sc.vfov_deg.to_radians(),
            sc.max_range,
            !flags.disable_pir,
        );
        let reachable = env.reachable_mask();

        // The vehicle lifts off below the start and climbs to it during the
        // take-off turn, so the floor around the start is seen at close range.
        let mut takeoff = start;
        if cfg.initial_spin {
            let step = Vec3::new(0.0, 0.0, cfg.voxel_size);
            while start.z - (takeoff.z - cfg.voxel_size) <= cfg.takeoff_climb + 1e-9
                && env.clear_at(&(takeoff - step), cfg.r_edge)
            {
                takeoff -= step;
            }
        }

        // take-off assumption: the surroundings of the climb column are known
        let mut dirty = Aabb::EMPTY;
        let sv = env.voxel_of(&start);
        let lo = env.voxel_of(&takeoff)[2];
        let r = (cfg.r_edge / cfg.voxel_size).ceil() as i32 + 1;
        for dz in (lo - sv[2] - r)..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = [sv[0] + dx, sv[1] + dy, sv[2] + dz];
                    if !env.in_bounds(v) {
                        continue;
                    }
                    let s = if env.is_solid(v) { Occupancy::Occupied } else { Occupancy::Free };
                    if grid.set_occupancy(v, s) {
                        dirty.include(v);
                    }
                }
            }
        }
        let last_unknown = grid.unknown_count();
        Ok(Self {
            limits: cfg.limits(),
            region_params: cfg.region_params(),
            cfg: cfg.clone(),
            flags,
            seed,
            scenario_name: scenario.name.clone(),
            state: UavState::at_rest(takeoff, env.layout.start_yaw),
            start,
            env,
            sensor,
            grid,
            skeleton,
            frontiers,
            proximal,
            reachable,
            t: 0.0,
            step: 0,
            active: None,
            esdf_dirty: dirty,
            frontier_dirty: dirty,
            failures: BTreeMap::new(),
            blacklist: BTreeSet::new(),
            last_unknown,
            last_progress_t: 0.0,
            cycles: 0,
            pp_invocations: 0,
            pp_successes: 0,
            rsp_invocations: 0,
            greedy_invocations: 0,
            bridge_invocations: 0,
            violations: 0,
            path_length: 0.0,
            orphans: 0,
            coverage_series: Vec::new(),
            next_coverage_sample: 0.0,
            trajectory: Vec::new(),
            events: Vec::new(),
            plans: Vec::new(),
            region_log: Vec::new(),
            timers: Timers {
                planner: Vec::new(),
                mapping: Vec::new(),
                regions: Vec::new(),
                frontier: Vec::new(),
                pipeline: Vec::new(),
                rsp_planner: Vec::new(),
            },
        })
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn env(&self) -> &GroundTruthEnv {
        &self.env
    }

    pub fn skeleton(&self) -> &SkeletonGraph {
        &self.skeleton
    }

    pub fn state(&self) -> &UavState {
        &self.state
    }

    fn sense_every(&self) -> u64 {
        ((self.cfg.sense_period / self.cfg.dt).round() as u64).max(1)
    }

    fn sense(&mut self) -> Result<()> {
        let scan = self.sensor.sense(&self.env, &self.state.position, self.state.yaw)?;
        let changed = self
            .grid
            .integrate_scan(&self.state.position, &scan, self.sensor.config().max_range)?;
        self.esdf_dirty = self.esdf_dirty.union(&changed);
        self.frontier_dirty = self.frontier_dirty.union(&changed);
        let unknown = self.grid.unknown_count();
        if unknown < self.last_unknown {
            self.last_unknown = unknown;
            self.last_progress_t = self.t;
        }
        Ok(())
    }

    fn coverage(&self) -> f64 {
        let vs = self.cfg.voxel_size;
        (self.grid.len() - self.grid.unknown_count()) as f64 * vs * vs * vs
    }

    fn sample_coverage(&mut self) {
        if self.t + 1e-9 >= self.next_coverage_sample {
            self.coverage_series.push([round3(self.t), self.coverage()]);
            self.next_coverage_sample += 1.0;
        }
    }

    fn record_step(&mut self) {
        if !self.env.clear_at(&self.state.position, self.cfg.r_edge) {
            self.violations += 1;
        }
        if self.step.is_multiple_of(self.cfg.trajectory_stride as u64) {
            self.trajectory.push(TrajectorySample {
                t: self.t,
                position: [self.state.position.x, self.state.position.y, self.state.position.z],
                yaw: self.state.yaw,
                speed: self.state.velocity.norm(),
                planner: self.active.as_ref().map(|a| a.follower.plan.source),
            });
        }
    }

    /// Advances one step with the current plan (or hovering).
    fn tick(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let next = match self.active.as_mut() {
            Some(a) => a.follower.advance(&self.state, dt, &self.limits),
            None => UavState {
                velocity: Vec3::zeros(),
                yaw_rate: 0.0,
                ..self.state
            },
        };
        self.path_length += (next.position - self.state.position).norm();
        self.state = next;
        self.step += 1;
        self.t = self.step as f64 * dt;
        self.record_step();
        if self.step.is_multiple_of(self.sense_every()) {
            self.sense()?;
        }
        self.sample_coverage();
        Ok(())
    }

    /// Take-off: one full turn at the yaw-rate limit while climbing to the
    /// start position.
    fn spin(&mut self) -> Result<()> {
        self.sense()?;
        let turn = self.limits.omega_max * self.cfg.dt;
        let steps = (std::f64::consts::TAU / turn).ceil() as u64;
        let yaw0 = self.state.yaw;
        let from = self.state.position;
        for k in 1..=steps {
            let target = wrap_angle(yaw0 + (k as f64 * turn).min(std::f64::consts::TAU));
            let f = k as f64 / steps as f64;
            let plan = MotionPlan {
                waypoints: vec![self.state.position, from + (self.start - from) * f],
                yaw: target,
                source: PlanSource::Spin,
            };
            self.active = Some(ActiveTarget {
                follower: Follower::new(plan, &self.state),
                cells: Vec::new(),
            });
            self.tick()?;
            if self.t >= self.cfg.budget {
                break;
            }
        }
        self.active = None;
        Ok(())
    }

    fn check_trigger(&self) -> Option<Trigger> {
        let Some(a) = &self.active else {
            return Some(Trigger::Start);
        };
        if !a.cells.is_empty() && a.cells.iter().all(|v| !is_frontier_cell(&self.grid, *v)) {
            return Some(Trigger::Resolved);
        }
        let goal = a.follower.plan.goal();
        let near = (self.state.position - goal).norm() <= self.cfg.reach_tolerance;
        let aligned = wrap_angle(self.state.yaw - a.follower.plan.yaw).abs() <= self.cfg.yaw_tolerance;
        if near && aligned {
            return Some(Trigger::Reached);
        }
        if a.follower.plan.source == PlanSource::Pp && self.t - self.last_progress_t >= self.cfg.watchdog {
            return Some(Trigger::Watchdog);
        }
        None
    }

    /// Counts a fruitless visit for every still-open cell of the target.
    fn penalize(&mut self, cells: &[VoxelIndex]) {
        for v in cells {
            if !is_frontier_cell(&self.grid, *v) {
                continue;
            }
            let i = self.grid.linear(*v).expect("frontier cells are in bounds");
            let n = self.failures.entry(i).or_insert(0);
            *n += 1;
            if *n >= self.cfg.blacklist_after {
                self.blacklist.insert(i);
            }
        }
    }

    /// Frontier clusters that may still be targeted: blacklisted cells
    /// removed, tiny clusters dropped.
    fn usable_clusters(&self, clusters: Vec<FrontierCluster>) -> Vec<FrontierCluster> {
        clusters
            .into_iter()
            .filter_map(|mut c| {
                if !self.blacklist.is_empty() {
                    c.cells.retain(|v| {
                        !self.blacklist.contains(&self.grid.linear(*v).expect("in bounds"))
                    });
                }
                (c.cells.len() >= self.cfg.frontier_min_cluster.max(1)).then_some(c)
            })
            .collect()
    }

    /// Runs until a terminal phase.
    pub fn run(&mut self) -> Result<Phase> {
        if self.cfg.initial_spin {
            self.spin()?;
        } else {
            self.sense()?;
        }
        self.sample_coverage();
        loop {
            if self.t >= self.cfg.budget {
                return Ok(Phase::TimedOut);
            }
            if let Some(trigger) = self.check_trigger() {
                if let Some(a) = self.active.take() {
                    if matches!(trigger, Trigger::Reached | Trigger::Watchdog) {
                        self.penalize(&a.cells);
                    }
                }
                let phase = self.cycle(trigger)?;
                if phase != Phase::Running {
                    return Ok(phase);
                }
                self.last_progress_t = self.t;
            }
            self.tick()?;
        }
    }

    /// One planning cycle. Returns the phase after it.
    fn cycle(&mut self, trigger: Trigger) -> Result<Phase> {
        self.cycles += 1;
        let cycle = self.cycles;
        let t_pipe = Instant::now();

        let t0 = Instant::now();
        let written = self.grid.compute_esdf(&self.esdf_dirty);
        self.esdf_dirty = Aabb::EMPTY;
        self.skeleton.update(&self.grid, &written);
        let mapping_ms = ms(t0);

        let t0 = Instant::now();
        let all = self.frontiers.detect(&self.grid, &self.frontier_dirty);
        self.frontier_dirty = Aabb::EMPTY;
        let frontier_ms = ms(t0);

        let t0 = Instant::now();
        let clusters = self.usable_clusters(all);
        self.skeleton.assign_frontiers(clusters.iter(), &self.grid);
        self.orphans = self.skeleton.orphans().len();
        let region_seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ cycle;
        let regions = analyze(&self.skeleton, &clusters, &self.grid, &self.region_params, region_seed);
        let regions_ms = ms(t0);

        let t0 = Instant::now();
        let mut event = CycleEvent {
            cycle,
            t: self.t,
            trigger: trigger.as_str().to_string(),
            pp_attempted: false,
            pp_found: false,
            pp_candidates: 0,
            rsp_invoked: false,
            greedy_invoked: false,
            bridge_invoked: false,
            planner: None,
            target: None,
            nodes: self.skeleton.node_count(),
            edges: self.skeleton.edge_count(),
            activated: self.skeleton.activated_nodes().count(),
            clusters: clusters.len(),
            orphans: self.orphans,
            regions: regions.regions.len(),
            unknown_voxels: self.grid.unknown_count(),
            outcome: Phase::Running,
        };
        let choice = if event.activated == 0 {
            None
        } else {
            self.choose(&regions, &clusters, &mut event)
        };
        let planner_ms = ms(t0);

        self.timers.mapping.push(mapping_ms);
        self.timers.frontier.push(frontier_ms);
        self.timers.regions.push(regions_ms);
        self.timers.planner.push(planner_ms);
        if event.rsp_invoked {
            self.timers.rsp_planner.push(planner_ms);
        }
        self.timers.pipeline.push(ms(t_pipe) - frontier_ms);

        self.region_log.push(RegionsSnapshot {
            cycle,
            t: self.t,
            regions: regions.records(),
        });
        let phase = match choice {
            Some((plan, record, cells)) => {
                event.planner = Some(plan.source);
                event.target = Some(record.target);
                self.plans.push(record);
                self.active = Some(ActiveTarget {
                    follower: Follower::new(plan, &self.state),
                    cells,
                });
                Phase::Running
            }
            None if event.activated == 0 => Phase::Complete,
            None => Phase::Stalled,
        };
        event.outcome = phase;
        self.events.push(event);
        Ok(phase)
    }

    fn cells_of(&self, node: NodeId, clusters: &[FrontierCluster]) -> Vec<VoxelIndex> {
        let Some(n) = self.skeleton.node(node) else {
            return Vec::new();
        };
        n.assigned_frontiers
            .iter()
            .filter_map(|cid| clusters.binary_search_by_key(cid, |c| c.id).ok())
            .flat_map(|i| clusters[i].cells.iter().copied())
            .collect()
    }

    /// Target selection: proximal planner first, the sequencer (or greedy
    /// fallback) only when it finds nothing.
    fn choose(
        &mut self,
        regions: &RegionAnalysis,
        clusters: &[FrontierCluster],
        event: &mut CycleEvent,
    ) -> Option<(MotionPlan, PlanRecord, Vec<VoxelIndex>)> {
        let pos = self.state.position;
        if !self.flags.disable_pp {
            event.pp_attempted = true;
            self.pp_invocations += 1;
            let out = find_proximal_target(
                &self.state,
                &self.skeleton,
                regions,
                clusters,
                &self.grid,
                &self.limits,
                &self.proximal,
            );
            event.pp_candidates = out.candidates.len();
            if let Some(target) = out.target() {
                event.pp_found = true;
                self.pp_successes += 1;
                let yaw = refine_yaw(target, &self.skeleton, self.cfg.w);
                let mut waypoints = vec![pos];
                waypoints.extend(
                    target
                        .node_path
                        .iter()
                        .map(|id| self.skeleton.node(*id).unwrap().position),
                );
                let cells = self.cells_of(target.node, clusters);
                return Some(self.make_plan(
                    waypoints,
                    yaw,
                    PlanSource::Pp,
                    target.node,
                    Some(target.cost),
                    None,
                    cells,
                ));
            }
        }

        let starts = start_nodes(&self.state, &self.skeleton, &self.grid, &self.proximal);
        let v_cur = starts.first().copied();
        let dist = v_cur.map(|v| self.skeleton.distances_from(&[(v, 0.0)]));
        let routable = |id: NodeId| dist.as_ref().is_some_and(|d| d[id.0 as usize].is_finite());
        if !self.skeleton.activated_nodes().any(|n| routable(n.id)) {
            return self.bridge_plan(clusters, event);
        }
        let v_cur = v_cur?;
        let (goal, source, tour, tour_cost) = if self.flags.disable_rsp {
            event.greedy_invoked = true;
            self.greedy_invocations += 1;
            let dist = dist.as_ref()?;
            let goal = self
                .skeleton
                .activated_nodes()
                .filter(|n| dist[n.id.0 as usize].is_finite())
                .min_by(|a, b| {
                    dist[a.id.0 as usize]
                        .total_cmp(&dist[b.id.0 as usize])
                        .then(a.id.cmp(&b.id))
                })?
                .id;
            (goal, PlanSource::Greedy, None, None)
        } else {
            event.rsp_invoked = true;
            self.rsp_invocations += 1;
            let open = &regions.regions;
            let matrix = build_cost_matrix(open, &self.skeleton, v_cur).ok()?;
            let tour = solve_tsp(&matrix).ok()?;
            let (_, goal) = next_global_target(&tour, open, &self.skeleton, v_cur).ok()?;
            let ids: Vec<usize> = tour.order.iter().map(|&i| open[i - 1].id).collect();
            (goal, PlanSource::Rsp, Some(ids), Some(tour.cost))
        };
        let route = self.skeleton.shortest_path(v_cur, goal).ok()??;
        let mut waypoints = vec![pos];
        waypoints.extend(route.iter().map(|id| self.skeleton.node(*id).unwrap().position));
        let yaw = self.goal_yaw(goal, &waypoints, clusters);
        let cells = self.cells_of(goal, clusters);
        Some(self.make_plan(waypoints, yaw, source, goal, None, tour.map(|t| (t, tour_cost.unwrap())), cells))
    }

    /// Joins the vehicle to the nearest activated node through known free
    /// space when the skeleton has no route to any of them.
    fn bridge_plan(
        &mut self,
        clusters: &[FrontierCluster],
        event: &mut CycleEvent,
    ) -> Option<(MotionPlan, PlanRecord, Vec<VoxelIndex>)> {
        let targets: Vec<NodeId> = self.skeleton.activated_nodes().map(|n| n.id).collect();
        if targets.is_empty() {
            return None;
        }
        event.bridge_invoked = true;
        self.bridge_invocations += 1;
        let pos = self.state.position;
        let bridge = self.skeleton.bridge(&self.grid, &pos, &targets)?;
        let goal = *bridge.path.last()?;
        let mut waypoints = vec![pos];
        waypoints.extend(bridge.path.iter().map(|id| self.skeleton.node(*id).unwrap().position));
        let yaw = self.goal_yaw(goal, &waypoints, clusters);
        let cells = self.cells_of(goal, clusters);
        Some(self.make_plan(waypoints, yaw, PlanSource::Bridge, goal, None, None, cells))
    }

    /// Best viewing yaw at `goal`, else the heading of the last leg.
    fn goal_yaw(&self, goal: NodeId, waypoints: &[Vec3], clusters: &[FrontierCluster]) -> f64 {
        let goal_node = self.skeleton.node(goal).unwrap();
        if let Some(vp) = viewpoint_for_node(goal_node, clusters, &self.grid, &self.proximal) {
            return vp.yaw;
        }
        let n = waypoints.len();
        if n >= 2 && (waypoints[n - 1] - waypoints[n - 2]).xy().norm() > 1e-9 {
            bearing(&waypoints[n - 2], &waypoints[n - 1])
        } else {
            self.state.yaw
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn make_plan(
        &self,
        waypoints: Vec<Vec3>,
        yaw: f64,
        source: PlanSource,
        target: NodeId,
        cost: Option<CostBreakdown>,
        tour: Option<(Vec<usize>, f64)>,
        cells: Vec<VoxelIndex>,
    ) -> (MotionPlan, PlanRecord, Vec<VoxelIndex>) {
        let record = PlanRecord {
            cycle: self.cycles,
            t: self.t,
            source,
            target,
            waypoints: waypoints.iter().map(|p| [p.x, p.y, p.z]).collect(),
            yaw,
            cost,
            tour_cost: tour.as_ref().map(|t| t.1),
            tour: tour.map(|t| t.0),
        };
        (
            MotionPlan {
                waypoints,
                yaw,
                source,
            },
            record,
            cells,
        )
    }

    /// Known fraction of the start-reachable free voxels.
    pub fn reachable_coverage(&self) -> (f64, usize) {
        let occ = self.grid.occupancy_slice();
        let mut total = 0usize;
        let mut known = 0usize;
        for (i, r) in self.reachable.iter().enumerate() {
            if *r {
                total += 1;
                if occ[i] != Occupancy::Unknown {
                    known += 1;
                }
            }
        }
        let ratio = if total == 0 { 1.0 } else { known as f64 / total as f64 };
        (ratio, total)
    }

    fn finish(mut self, phase: Phase, started: Instant) -> RunOutput {
        self.coverage_series.push([round3(self.t), self.coverage()]);
        let (reachable_coverage, reachable_free_voxels) = self.reachable_coverage();
        let status = ExplorationStatus {
            phase,
            sim_time: self.t,
            cycles: self.cycles,
        };
        let metrics = MetricsRecord {
            scenario: self.scenario_name.clone(),
            seed: self.seed,
            variant: self.flags.label(),
            status,
            exploration_time: self.t,
            path_length: self.path_length,
            flight_speed: if self.t > 0.0 { self.path_length / self.t } else { 0.0 },
            coverage: self.coverage(),
            reachable_coverage,
            reachable_free_voxels,
            cycles: self.cycles,
            pp_invocations: self.pp_invocations,
            pp_successes: self.pp_successes,
            rsp_invocations: self.rsp_invocations,
            greedy_invocations: self.greedy_invocations,
            bridge_invocations: self.bridge_invocations,
            clearance_violations: self.violations,
            blacklisted_cells: self.blacklist.len(),
            orphan_clusters: self.orphans,
            coverage_series: self.coverage_series,
        };
        let timing = TimingRecord {
            planner_ms: Stats::of(&self.timers.planner),
            mapping_ms: Stats::of(&self.timers.mapping),
            regions_ms: Stats::of(&self.timers.regions),
            frontier_ms: Stats::of(&self.timers.frontier),
            pipeline_ms: Stats::of(&self.timers.pipeline),
            rsp_cycle_planner_ms: Stats::of(&self.timers.rsp_planner),
            per_cycle_planner_ms: self.timers.planner,
            wall_s: started.elapsed().as_secs_f64(),
        };
        RunOutput {
            metrics,
            timing,
            trajectory: self.trajectory,
            events: self.events,
            plans: self.plans,
            regions: self.region_log,
        }
    }
}

fn round3(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}
