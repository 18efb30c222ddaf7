//! Ground-truth worlds.
//!
//! A world is an axis-aligned box with its origin at zero, filled with box and
//! vertical-cylinder obstacles. The outer one-voxel shell of the raster is
//! always solid, so the world is sealed. Three procedural layouts are
//! provided: offices (rooms with doorways on a grid), mazes (recursive
//! division) and tunnels (a corridor tree carved out of rock). Every
//! generated world is checked by flood fill and regenerated on a new random
//! stream when some free voxel is cut off from the start.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use skelex_core::grid_map::{VoxelIndex, FACE_OFFSETS};
use skelex_core::Vec3;

use crate::error::{Result, SimError};

/// Generation attempts before giving up on connectivity.
pub const MAX_ATTEMPTS: u64 = 10;
/// Smallest accepted horizontal extent (m).
pub const MIN_HORIZONTAL: f64 = 2.0;
/// Smallest accepted height (m).
pub const MIN_HEIGHT: f64 = 1.0;
pub const MAX_HORIZONTAL: f64 = 200.0;
pub const MAX_HEIGHT: f64 = 20.0;

const WALL: f64 = 0.2;
const DOOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Office,
    Maze,
    Tunnel,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Office => "office",
            EnvKind::Maze => "maze",
            EnvKind::Tunnel => "tunnel",
        })
    }
}

impl FromStr for EnvKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "office" => Ok(EnvKind::Office),
            "maze" => Ok(EnvKind::Maze),
            "tunnel" => Ok(EnvKind::Tunnel),
            other => Err(SimError::Scenario(format!(
                "unknown environment kind `{other}` (expected office, maze or tunnel)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    /// Vertical cylinder.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z_min: f64,
        z_max: f64,
    },
}

impl Obstacle {
    fn cuboid(min: [f64; 3], max: [f64; 3]) -> Self {
        Obstacle::Box { min, max }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            Obstacle::Box { min, max } => (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a]),
            Obstacle::Cylinder {
                center,
                radius,
                z_min,
                z_max,
            } => {
                let dx = p.x - center[0];
                let dy = p.y - center[1];
                p.z >= *z_min && p.z <= *z_max && dx * dx + dy * dy <= radius * radius
            }
        }
    }

    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Obstacle::Box { min, max } => (*min, *max),
            Obstacle::Cylinder {
                center,
                radius,
                z_min,
                z_max,
            } => (
                [center[0] - radius, center[1] - radius, *z_min],
                [center[0] + radius, center[1] + radius, *z_max],
            ),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        let finite = lo.iter().chain(hi.iter()).all(|v| v.is_finite());
        let ordered = (0..3).all(|a| lo[a] <= hi[a]);
        let radius_ok = match self {
            Obstacle::Cylinder { radius, .. } => *radius > 0.0,
            Obstacle::Box { .. } => true,
        };
        if finite && ordered && radius_ok {
            Ok(())
        } else {
            Err(SimError::Scenario(format!("malformed obstacle {self:?}")))
        }
    }
}

/// Voxel-independent description of a world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvLayout {
    /// Extent of the world box (m); the box spans `[0, size]`.
    pub size: [f64; 3],
    pub obstacles: Vec<Obstacle>,
    pub start: [f64; 3],
    /// Initial heading (rad).
    #[serde(default)]
    pub start_yaw: f64,
}

impl EnvLayout {
    pub fn validate(&self) -> Result<()> {
        check_size(self.size)?;
        for o in &self.obstacles {
            o.validate()?;
        }
        if !(0..3).all(|a| self.start[a] > 0.0 && self.start[a] < self.size[a]) {
            return Err(SimError::Scenario(format!(
                "start {:?} lies outside the world {:?}",
                self.start, self.size
            )));
        }
        if !self.start_yaw.is_finite() {
            return Err(SimError::Scenario("start_yaw must be finite".into()));
        }
        Ok(())
    }
}

/// Rasterized ground truth.
#[derive(Clone, Debug)]
pub struct GroundTruthEnv {
    pub layout: EnvLayout,
    voxel_size: f64,
    dims: [usize; 3],
    solid: Vec<bool>,
}

impl GroundTruthEnv {
    /// Rasterizes `layout`: a voxel is solid when its center lies inside an
    /// obstacle or it belongs to the outer shell.
    pub fn rasterize(layout: EnvLayout, voxel_size: f64) -> Result<Self> {
        layout.validate()?;
        if !(voxel_size > 0.0) {
            return Err(SimError::Config(format!(
                "voxel_size must be positive, got {voxel_size}"
            )));
        }
        let dims = [0, 1, 2].map(|a| (layout.size[a] / voxel_size).round() as usize);
        if dims.iter().any(|&d| d < 8) {
            return Err(SimError::Scenario(format!(
                "world {:?} is fewer than 8 voxels of {voxel_size} m along some axis",
                layout.size
            )));
        }
        let mut env = Self {
            voxel_size,
            dims,
            solid: vec![false; dims[0] * dims[1] * dims[2]],
            layout,
        };
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    if x == 0 || y == 0 || z == 0 || x + 1 == dims[0] || y + 1 == dims[1] || z + 1 == dims[2] {
                        let i = env.index([x as i32, y as i32, z as i32]);
                        env.solid[i] = true;
                    }
                }
            }
        }
        for o in env.layout.obstacles.clone() {
            let (lo, hi) = o.bounds();
            let vlo = env.voxel_of(&Vec3::from(lo));
            let vhi = env.voxel_of(&Vec3::from(hi));
            for z in vlo[2].max(0)..=vhi[2].min(dims[2] as i32 - 1) {
                for y in vlo[1].max(0)..=vhi[1].min(dims[1] as i32 - 1) {
                    for x in vlo[0].max(0)..=vhi[0].min(dims[0] as i32 - 1) {
                        let v = [x, y, z];
                        if o.contains(&env.center(v)) {
                            let i = env.index(v);
                            env.solid[i] = true;
                        }
                    }
                }
            }
        }
        Ok(env)
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn start(&self) -> Vec3 {
        Vec3::from(self.layout.start)
    }

    pub fn in_bounds(&self, v: VoxelIndex) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
    }

    fn index(&self, v: VoxelIndex) -> usize {
        v[0] as usize + self.dims[0] * (v[1] as usize + self.dims[1] * v[2] as usize)
    }

    pub fn voxel_of(&self, p: &Vec3) -> VoxelIndex {
        [0, 1, 2].map(|a| (p[a] / self.voxel_size).floor() as i32)
    }

    pub fn center(&self, v: VoxelIndex) -> Vec3 {
        Vec3::new(
            (v[0] as f64 + 0.5) * self.voxel_size,
            (v[1] as f64 + 0.5) * self.voxel_size,
            (v[2] as f64 + 0.5) * self.voxel_size,
        )
    }

    /// Out-of-bounds voxels count as solid.
    pub fn is_solid(&self, v: VoxelIndex) -> bool {
        !self.in_bounds(v) || self.solid[self.index(v)]
    }

    pub fn solid_at(&self, p: &Vec3) -> bool {
        self.is_solid(self.voxel_of(p))
    }

    /// Raw solid mask in x-fastest order.
    pub fn solid_mask(&self) -> &[bool] {
        &self.solid
    }

    pub fn free_count(&self) -> usize {
        self.solid.iter().filter(|s| !**s).count()
    }

    /// Free voxels 6-connected to the start voxel.
    pub fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.solid.len()];
        let start = self.voxel_of(&self.start());
        if self.is_solid(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(v) = queue.pop_front() {
            for o in FACE_OFFSETS {
                let n = [v[0] + o[0], v[1] + o[1], v[2] + o[2]];
                if self.is_solid(n) {
                    continue;
                }
                let i = self.index(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Whether every voxel within `radius` of the voxel holding `p` is free.
    /// Uses the same neighbourhood as the mapping clearance check.
    pub fn clear_at(&self, p: &Vec3, radius: f64) -> bool {
        let v = self.voxel_of(p);
        let r = (radius / self.voxel_size).ceil() as i32;
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    let d = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * self.voxel_size;
                    if (d < radius - 1e-9 || (dx == 0 && dy == 0 && dz == 0))
                        && self.is_solid([v[0] + dx, v[1] + dy, v[2] + dz])
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn check_size(size: [f64; 3]) -> Result<()> {
    let ok_h = |s: f64| (MIN_HORIZONTAL..=MAX_HORIZONTAL).contains(&s);
    if !(ok_h(size[0]) && ok_h(size[1]) && (MIN_HEIGHT..=MAX_HEIGHT).contains(&size[2])) {
        return Err(SimError::Scenario(format!(
            "world size {size:?} outside limits: horizontal {MIN_HORIZONTAL}..{MAX_HORIZONTAL} m, \
             height {MIN_HEIGHT}..{MAX_HEIGHT} m"
        )));
    }
    Ok(())
}

/// Layout knobs shared by the generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorOptions {
    /// Number of office rooms; derived from the floor area when absent.
    pub rooms: Option<usize>,
    /// Maze cell pitch (m).
    pub maze_cell: f64,
    /// Tunnel corridor width (m).
    pub tunnel_width: f64,
    /// Fraction of tunnel cells carved out.
    pub tunnel_fill: f64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            rooms: None,
            maze_cell: 2.0,
            tunnel_width: 1.6,
            tunnel_fill: 0.45,
        }
    }
}

/// Generates and rasterizes a world of the given kind.
pub fn generate_environment(
    kind: EnvKind,
    size: [f64; 3],
    seed: u64,
    voxel_size: f64,
    opts: &GeneratorOptions,
) -> Result<GroundTruthEnv> {
    check_size(size)?;
    let mut last_error = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let layout = match kind {
            EnvKind::Office => office(size, opts.rooms, &mut rng),
            EnvKind::Maze => maze(size, opts.maze_cell, &mut rng),
            EnvKind::Tunnel => tunnel(size, opts.tunnel_width, opts.tunnel_fill, &mut rng),
        };
        let mut layout = layout;
        layout.start = layout
            .start
            .map(|c| ((c / voxel_size).floor() + 0.5) * voxel_size);
        let env = GroundTruthEnv::rasterize(layout, voxel_size)?;
        match connectivity_error(&env) {
            None => return Ok(env),
            Some(e) => last_error = e,
        }
    }
    Err(SimError::Generation(format!(
        "{kind} {size:?} seed {seed}: {last_error} after {MAX_ATTEMPTS} attempts"
    )))
}

fn connectivity_error(env: &GroundTruthEnv) -> Option<String> {
    let start = env.start();
    if !env.clear_at(&start, 2.0 * env.voxel_size()) {
        return Some("start pose is not clear".into());
    }
    let reached = env.reachable_mask().iter().filter(|r| **r).count();
    let free = env.free_count();
    (reached != free).then(|| format!("{} of {free} free voxels unreachable", free - reached))
}

/// Start height: the voxel center nearest mid-height.
fn start_height(size: [f64; 3]) -> f64 {
    size[2] / 2.0
}

/// `k - 1` interior cut positions splitting `[0, len]` into `k` jittered parts.
fn cuts(len: f64, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let pitch = len / k as f64;
    (1..k)
        .map(|i| i as f64 * pitch + rng.gen_range(-0.15..=0.15) * pitch)
        .collect()
}

/// A wall along `axis` (0 = runs along x) at `at` on the other axis from
/// `lo` to `hi`, with full-height gaps centered at `doors`.
fn wall_with_doors(
    out: &mut Vec<Obstacle>,
    axis: usize,
    at: f64,
    lo: f64,
    hi: f64,
    doors: &[f64],
    height: f64,
) {
    let mut gaps: Vec<(f64, f64)> = doors.iter().map(|d| (d - DOOR / 2.0, d + DOOR / 2.0)).collect();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cursor = lo;
    let mut pieces = Vec::new();
    for (g0, g1) in gaps {
        if g0 > cursor {
            pieces.push((cursor, g0));
        }
        cursor = cursor.max(g1);
    }
    if hi > cursor {
        pieces.push((cursor, hi));
    }
    for (a, b) in pieces {
        let (min, max) = if axis == 0 {
            ([a, at - WALL / 2.0, 0.0], [b, at + WALL / 2.0, height])
        } else {
            ([at - WALL / 2.0, a, 0.0], [at + WALL / 2.0, b, height])
        };
        out.push(Obstacle::cuboid(min, max));
    }
}

/// Samples a door center in `[lo, hi]` keeping clear of `avoid` positions.
fn door_position(lo: f64, hi: f64, avoid: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let margin = DOOR / 2.0 + 0.35;
    let (a, b) = (lo + margin, hi - margin);
    if a < b {
        for _ in 0..64 {
            let x = rng.gen_range(a..=b);
            if avoid.iter().all(|w| (x - w).abs() >= margin + WALL / 2.0) {
                return x;
            }
        }
    }
    (lo + hi) / 2.0
}

fn office(size: [f64; 3], rooms: Option<usize>, rng: &mut ChaCha8Rng) -> EnvLayout {
    let [sx, sy, sz] = size;
    let n = rooms
        .unwrap_or_else(|| ((sx * sy / 16.0).round() as usize).max(1))
        .max(1);
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let ys = cuts(sy, rows, rng);
    let mut row_bounds = vec![0.0];
    row_bounds.extend(&ys);
    row_bounds.push(sy);
    let xs: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let count = if r + 1 == rows { n - cols * (rows - 1) } else { cols };
            cuts(sx, count, rng)
        })
        .collect();

    let mut obstacles = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        let mut avoid: Vec<f64> = xs[i].iter().chain(xs[i + 1].iter()).copied().collect();
        let mut doors = vec![door_position(0.0, sx, &avoid, rng)];
        if rng.gen_bool(0.4) {
            avoid.push(doors[0]);
            avoid.push(doors[0] + DOOR);
            avoid.push(doors[0] - DOOR);
            let d = door_position(0.0, sx, &avoid, rng);
            if (d - doors[0]).abs() > 2.0 * DOOR {
                doors.push(d);
            }
        }
        wall_with_doors(&mut obstacles, 0, y, 0.0, sx, &doors, sz);
    }
    for (r, row) in xs.iter().enumerate() {
        let (y0, y1) = (row_bounds[r], row_bounds[r + 1]);
        for &x in row {
            let door = door_position(y0, y1, &[y0, y1], rng);
            wall_with_doors(
                &mut obstacles,
                1,
                x,
                (y0 - WALL / 2.0).max(0.0),
                (y1 + WALL / 2.0).min(sy),
                &[door],
                sz,
            );
        }
    }

    let start = [
        xs[0].first().copied().unwrap_or(sx) / 2.0,
        row_bounds[1] / 2.0,
        start_height(size),
    ];
    // furniture, kept away from walls, doors and the start
    let mut placed: Vec<([f64; 2], f64)> = Vec::new();
    for r in 0..rows {
        let mut col_bounds = vec![0.0];
        col_bounds.extend(&xs[r]);
        col_bounds.push(sx);
        for c in 0..col_bounds.len() - 1 {
            let (x0, x1) = (col_bounds[c] + 0.8, col_bounds[c + 1] - 0.8);
            let (y0, y1) = (row_bounds[r] + 0.8, row_bounds[r + 1] - 0.8);
            let count = rng.gen_range(0..=2);
            for _ in 0..count {
                let half = rng.gen_range(0.15..=0.45);
                if x1 - x0 < 2.0 * half || y1 - y0 < 2.0 * half {
                    continue;
                }
                let cx = rng.gen_range(x0 + half..=x1 - half);
                let cy = rng.gen_range(y0 + half..=y1 - half);
                let near_start = (cx - start[0]).hypot(cy - start[1]) < half + 1.2;
                let crowded = placed
                    .iter()
                    .any(|(p, h)| (cx - p[0]).hypot(cy - p[1]) < half + h + 0.8);
                if near_start || crowded {
                    continue;
                }
                placed.push(([cx, cy], half));
                if rng.gen_bool(0.5) {
                    obstacles.push(Obstacle::Cylinder {
                        center: [cx, cy],
                        radius: half,
                        z_min: 0.0,
                        z_max: sz,
                    });
                } else {
                    let h = if rng.gen_bool(0.5) { 0.9 } else { sz };
                    obstacles.push(Obstacle::cuboid(
                        [cx - half, cy - half, 0.0],
                        [cx + half, cy + half, h],
                    ));
                }
            }
        }
    }
    EnvLayout {
        size,
        obstacles,
        start,
        start_yaw: 0.0,
    }
}

fn maze(size: [f64; 3], cell: f64, rng: &mut ChaCha8Rng) -> EnvLayout {
    let [sx, sy, sz] = size;
    let cols = ((sx / cell).floor() as usize).max(1);
    let rows = ((sy / cell).floor() as usize).max(1);
    let (cw, ch) = (sx / cols as f64, sy / rows as f64);
    let mut obstacles = Vec::new();
    // chambers in cell units: (x, y, w, h)
    let mut stack = vec![(0usize, 0usize, cols, rows)];
    while let Some((x, y, w, h)) = stack.pop() {
        if w < 2 || h < 2 {
            continue;
        }
        let horizontal = match w.cmp(&h) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => rng.gen_bool(0.5),
        };
        if horizontal {
            let wy = rng.gen_range(y + 1..y + h);
            let gap = rng.gen_range(x..x + w);
            let at = wy as f64 * ch;
            push_runs(&mut obstacles, 0, at, x, x + w, gap, cw, sz);
            stack.push((x, y, w, wy - y));
            stack.push((x, wy, w, y + h - wy));
        } else {
            let wx = rng.gen_range(x + 1..x + w);
            let gap = rng.gen_range(y..y + h);
            let at = wx as f64 * cw;
            push_runs(&mut obstacles, 1, at, y, y + h, gap, ch, sz);
            stack.push((x, y, wx - x, h));
            stack.push((wx, y, x + w - wx, h));
        }
    }
    EnvLayout {
        size,
        obstacles,
        start: [cw / 2.0, ch / 2.0, start_height(size)],
        start_yaw: 0.0,
    }
}

/// Wall cells `from..to` along `axis` at `at`, leaving cell `gap` open.
#[allow(clippy::too_many_arguments)]
fn push_runs(
    out: &mut Vec<Obstacle>,
    axis: usize,
    at: f64,
    from: usize,
    to: usize,
    gap: usize,
    pitch: f64,
    height: f64,
) {
    let mut runs = Vec::new();
    if gap > from {
        runs.push((from, gap));
    }
    if to > gap + 1 {
        runs.push((gap + 1, to));
    }
    for (a, b) in runs {
        let lo = a as f64 * pitch - if a == from { WALL / 2.0 } else { 0.0 };
        let hi = b as f64 * pitch + if b == to { WALL / 2.0 } else { 0.0 };
        let (min, max) = if axis == 0 {
            ([lo, at - WALL / 2.0, 0.0], [hi, at + WALL / 2.0, height])
        } else {
            ([at - WALL / 2.0, lo, 0.0], [at + WALL / 2.0, hi, height])
        };
        out.push(Obstacle::cuboid(min, max));
    }
}

fn tunnel(size: [f64; 3], width: f64, fill: f64, rng: &mut ChaCha8Rng) -> EnvLayout {
    let [sx, sy, sz] = size;
    let cols = ((sx / width).floor() as usize).max(1);
    let rows = ((sy / width).floor() as usize).max(1);
    let (cw, ch) = (sx / cols as f64, sy / rows as f64);
    let mut carved = vec![false; cols * rows];
    let idx = |c: usize, r: usize| c + cols * r;
    let root = (0usize, rows / 2);
    carved[idx(root.0, root.1)] = true;
    let mut count = 1usize;
    let target = ((fill * (cols * rows) as f64).ceil() as usize).max(1);
    let mut active = vec![root];
    let neighbours = |c: usize, r: usize| -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if c > 0 {
            out.push((c - 1, r));
        }
        if c + 1 < cols {
            out.push((c + 1, r));
        }
        if r > 0 {
            out.push((c, r - 1));
        }
        if r + 1 < rows {
            out.push((c, r + 1));
        }
        out
    };
    while count < target && !active.is_empty() {
        // growing tree: mostly extend the newest cell for long corridors
        let k = if rng.gen_bool(0.75) {
            active.len() - 1
        } else {
            rng.gen_range(0..active.len())
        };
        let (c, r) = active[k];
        let options: Vec<(usize, usize)> = neighbours(c, r)
            .into_iter()
            .filter(|&(nc, nr)| {
                !carved[idx(nc, nr)]
                    && neighbours(nc, nr)
                        .iter()
                        .filter(|&&(a, b)| carved[idx(a, b)])
                        .count()
                        == 1
            })
            .collect();
        if options.is_empty() {
            active.remove(k);
            continue;
        }
        let (nc, nr) = options[rng.gen_range(0..options.len())];
        carved[idx(nc, nr)] = true;
        count += 1;
        active.push((nc, nr));
    }
    let mut obstacles = Vec::new();
    for r in 0..rows {
        let mut c = 0;
        while c < cols {
            if carved[idx(c, r)] {
                c += 1;
                continue;
            }
            let start = c;
            while c < cols && !carved[idx(c, r)] {
                c += 1;
            }
            obstacles.push(Obstacle::cuboid(
                [start as f64 * cw, r as f64 * ch, 0.0],
                [c as f64 * cw, (r + 1) as f64 * ch, sz],
            ));
        }
    }
    EnvLayout {
        size,
        obstacles,
        start: [
            (root.0 as f64 + 0.5) * cw,
            (root.1 as f64 + 0.5) * ch,
            start_height(size),
        ],
        start_yaw: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(kind: EnvKind, seed: u64) -> GroundTruthEnv {
        generate_environment(kind, [12.0, 12.0, 2.5], seed, 0.1, &GeneratorOptions::default()).unwrap()
    }

    #[test]
    fn maze_is_deterministic() {
        let a = generate_environment(EnvKind::Maze, [10.0, 10.0, 2.5], 7, 0.1, &Default::default()).unwrap();
        let b = generate_environment(EnvKind::Maze, [10.0, 10.0, 2.5], 7, 0.1, &Default::default()).unwrap();
        assert_eq!(a.solid_mask(), b.solid_mask());
        assert_eq!(a.layout, b.layout);
    }

    #[test]
    fn office_without_rooms_is_one_room() {
        let opts = GeneratorOptions {
            rooms: Some(0),
            ..Default::default()
        };
        let env = generate_environment(EnvKind::Office, [6.0, 6.0, 2.5], 1, 0.1, &opts).unwrap();
        for o in &env.layout.obstacles {
            let (lo, hi) = o.bounds();
            assert!(hi[0] - lo[0] < 1.0 && hi[1] - lo[1] < 1.0, "{o:?}");
        }
    }

    #[test]
    fn every_kind_is_connected_from_start() {
        for kind in [EnvKind::Office, EnvKind::Maze, EnvKind::Tunnel] {
            for seed in 0..3 {
                let env = gen(kind, seed);
                let reach = env.reachable_mask();
                let n = reach.iter().filter(|r| **r).count();
                assert_eq!(n, env.free_count(), "{kind} seed {seed}");
                assert!(env.clear_at(&env.start(), 0.2));
            }
        }
    }

    #[test]
    fn tiny_world_is_rejected() {
        assert!(generate_environment(EnvKind::Maze, [0.1, 12.0, 2.5], 0, 0.1, &Default::default()).is_err());
    }

    #[test]
    fn shell_is_solid() {
        let env = gen(EnvKind::Office, 4);
        assert!(env.is_solid([0, 5, 5]));
        assert!(env.is_solid([5, 5, env.dims()[2] as i32 - 1]));
        assert!(env.is_solid([-1, 5, 5]));
    }

    #[test]
    fn kind_parses() {
        assert_eq!("maze".parse::<EnvKind>().unwrap(), EnvKind::Maze);
        assert!("cave".parse::<EnvKind>().is_err());
    }
}
