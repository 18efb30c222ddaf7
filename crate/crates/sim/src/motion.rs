//! Waypoint following with a kinematic speed profile.
//!
//! The vehicle flies the polyline at a scalar speed along the current
//! segment. Speed grows at `a_max` up to the segment cap: `v_max`, lowered so
//! the vertical component stays within `v_z_max`. At a turning point only the
//! component of the velocity along the new segment survives, which matches
//! the realignment term of the planner's time cost. There is no braking
//! before the last waypoint; the vehicle stops there.

use serde::{Deserialize, Serialize};

use skelex_core::geometry::wrap_angle;
use skelex_core::planner::{KinematicLimits, UavState};
use skelex_core::Vec3;

/// Which planner produced a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    /// Proximal planner.
    Pp,
    /// Region-sequence planner route.
    Rsp,
    /// Nearest activated node, used when the sequencer is disabled.
    Greedy,
    /// Path through known free space joining a cut-off part of the skeleton.
    Bridge,
    /// Take-off rotation in place.
    Spin,
}

impl PlanSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanSource::Pp => "pp",
            PlanSource::Rsp => "rsp",
            PlanSource::Greedy => "greedy",
            PlanSource::Bridge => "bridge",
            PlanSource::Spin => "spin",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    /// The first waypoint is the position the plan was made from.
    pub waypoints: Vec<Vec3>,
    pub yaw: f64,
    pub source: PlanSource,
}

impl MotionPlan {
    pub fn goal(&self) -> Vec3 {
        *self.waypoints.last().expect("plans have at least one waypoint")
    }
}

/// Largest speed along `dir` that keeps every axis within its limit.
pub fn speed_cap(dir: &Vec3, limits: &KinematicLimits) -> f64 {
    let mut cap = limits.v_max;
    for a in 0..2 {
        if dir[a].abs() > 1e-12 {
            cap = cap.min(limits.v_max / dir[a].abs());
        }
    }
    if dir.z.abs() > 1e-12 {
        cap = cap.min(limits.v_z_max / dir.z.abs());
    }
    cap
}

/// Plan progress. Created per plan; carries the speed across steps.
#[derive(Clone, Debug)]
pub struct Follower {
    pub plan: MotionPlan,
    /// Index of the waypoint being approached.
    next: usize,
    speed: f64,
    dir: Option<Vec3>,
}

impl Follower {
    /// Starts following `plan` with the current velocity projected on the
    /// first leg.
    pub fn new(plan: MotionPlan, state: &UavState) -> Self {
        let mut f = Self {
            plan,
            next: 1,
            speed: 0.0,
            dir: None,
        };
        f.skip_reached(&state.position);
        if let Some(d) = f.leg_dir(&state.position) {
            f.speed = state.velocity.dot(&d).max(0.0);
            f.dir = Some(d);
        }
        f
    }

    pub fn finished(&self) -> bool {
        self.next >= self.plan.waypoints.len()
    }

    fn skip_reached(&mut self, p: &Vec3) {
        while self.next < self.plan.waypoints.len() && (self.plan.waypoints[self.next] - p).norm() < 1e-9 {
            self.next += 1;
        }
    }

    fn leg_dir(&self, p: &Vec3) -> Option<Vec3> {
        let w = self.plan.waypoints.get(self.next)?;
        let d = w - p;
        let n = d.norm();
        (n > 1e-9).then(|| d / n)
    }

    /// Advances the vehicle by `dt` seconds.
    pub fn advance(&mut self, state: &UavState, dt: f64, limits: &KinematicLimits) -> UavState {
        let mut pos = state.position;
        let mut time = dt;
        let mut accelerated = false;
        while time > 1e-12 && !self.finished() {
            let Some(dir) = self.leg_dir(&pos) else {
                self.next += 1;
                continue;
            };
            if let Some(prev) = self.dir {
                if (prev - dir).norm() > 1e-9 {
                    self.speed *= prev.dot(&dir).max(0.0);
                }
            }
            self.dir = Some(dir);
            let cap = speed_cap(&dir, limits);
            if !accelerated {
                self.speed = (self.speed + limits.a_max * dt).min(cap);
                accelerated = true;
            } else {
                self.speed = self.speed.min(cap);
            }
            if self.speed <= 0.0 {
                break;
            }
            let target = self.plan.waypoints[self.next];
            let dist = (target - pos).norm();
            let travel = self.speed * time;
            if travel < dist {
                pos += dir * travel;
                time = 0.0;
            } else {
                pos = target;
                time -= dist / self.speed;
                self.next += 1;
            }
        }
        let velocity = match (self.finished(), self.dir) {
            (false, Some(d)) => d * self.speed,
            _ => Vec3::zeros(),
        };
        if self.finished() {
            self.speed = 0.0;
        }
        let err = wrap_angle(self.plan.yaw - state.yaw);
        let max_turn = limits.omega_max * dt;
        let turn = err.clamp(-max_turn, max_turn);
        UavState {
            position: pos,
            velocity,
            yaw: wrap_angle(state.yaw + turn),
            yaw_rate: turn / dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> KinematicLimits {
        KinematicLimits::default()
    }

    fn plan(pts: &[[f64; 3]]) -> MotionPlan {
        MotionPlan {
            waypoints: pts.iter().map(|p| Vec3::from(*p)).collect(),
            yaw: 0.0,
            source: PlanSource::Pp,
        }
    }

    fn fly(mut state: UavState, f: &mut Follower, dt: f64) -> (UavState, f64) {
        let mut t = 0.0;
        while !f.finished() && t < 100.0 {
            state = f.advance(&state, dt, &limits());
            t += dt;
        }
        (state, t)
    }

    #[test]
    fn straight_leg_at_cruise() {
        let state = UavState {
            velocity: Vec3::new(2.0, 0.0, 0.0),
            ..UavState::at_rest(Vec3::zeros(), 0.0)
        };
        let mut f = Follower::new(plan(&[[0.0, 0.0, 0.0], [4.0, 0.0, 0.0]]), &state);
        let (end, t) = fly(state, &mut f, 0.05);
        assert!((t - 2.0).abs() <= 0.05 + 1e-9, "t = {t}");
        assert!((end.position - Vec3::new(4.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn reversal_resets_speed() {
        let state = UavState {
            velocity: Vec3::new(2.0, 0.0, 0.0),
            ..UavState::at_rest(Vec3::zeros(), 0.0)
        };
        let mut f = Follower::new(plan(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]), &state);
        let mut s = state;
        let mut saw_reversal = false;
        for _ in 0..200 {
            s = f.advance(&s, 0.05, &limits());
            if s.velocity.x < 0.0 {
                assert!(s.velocity.norm() <= limits().a_max * 0.05 + 1e-9);
                saw_reversal = true;
                break;
            }
        }
        assert!(saw_reversal);
    }

    #[test]
    fn vertical_speed_capped() {
        let l = KinematicLimits {
            v_z_max: 0.5,
            ..limits()
        };
        let state = UavState::at_rest(Vec3::zeros(), 0.0);
        let mut f = Follower::new(plan(&[[0.0, 0.0, 0.0], [0.0, 0.0, 3.0]]), &state);
        let mut s = state;
        for _ in 0..100 {
            s = f.advance(&s, 0.05, &l);
            assert!(s.velocity.z.abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn yaw_slews_at_rate_limit() {
        let state = UavState::at_rest(Vec3::zeros(), 0.0);
        let mut p = plan(&[[0.0, 0.0, 0.0]]);
        p.yaw = 3.0;
        let mut f = Follower::new(p, &state);
        let s = f.advance(&state, 0.1, &limits());
        assert!((s.yaw - 0.157).abs() < 1e-12);
    }
}
