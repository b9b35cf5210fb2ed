//! Dubins car in a walled room with one exit, seen through a noisy lidar.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{kinematics_step, point_segment_distance, Pose};
use super::lidar::{corrupt, LidarNoise, Room};
use super::path::{all_dubins_paths, plan_dubins, DubinsPath, PathFollower};
use super::{check_action, EnvError, Environment, Outcome, StepResult};
use crate::policy::{Action, Observation};

/// How the expert turns a Dubins plan into commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertMode {
    /// Replan from the true pose every step.
    #[default]
    Replan,
    /// Plan once at reset and track the path by arc length.
    OpenLoop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DubinsRoomConfig {
    pub room_size: f64,
    pub exit_width: f64,
    pub lidar_rays: usize,
    pub lidar_max_range: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub dt: f64,
    pub omega_max: f64,
    pub speed: f64,
    pub max_steps: usize,
    pub collision_radius: f64,
    pub expert_mode: ExpertMode,
    /// Start poses are uniform over these ranges.
    pub start_x: [f64; 2],
    pub start_y: [f64; 2],
    pub start_heading: [f64; 2],
}

impl Default for DubinsRoomConfig {
    fn default() -> Self {
        Self {
            room_size: 100.0,
            exit_width: 20.0,
            lidar_rays: 100,
            lidar_max_range: 100.0,
            sigma1: 10.0,
            sigma2: 10.0,
            dt: 0.1,
            omega_max: 1.0,
            speed: 10.0,
            max_steps: 300,
            collision_radius: 0.5,
            expert_mode: ExpertMode::Replan,
            start_x: [30.0, 70.0],
            start_y: [20.0, 45.0],
            start_heading: [-PI, 0.0],
        }
    }
}

impl DubinsRoomConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        let positive = [
            self.room_size,
            self.exit_width,
            self.lidar_max_range,
            self.dt,
            self.omega_max,
            self.speed,
            self.collision_radius,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("physical quantities must be positive and finite");
        }
        if self.exit_width >= self.room_size {
            return bad("exit_width must be smaller than room_size");
        }
        if !(self.sigma1 >= 0.0 && self.sigma2 >= 0.0) {
            return bad("noise scales must be non-negative");
        }
        if self.lidar_rays == 0 || self.max_steps == 0 {
            return bad("lidar_rays and max_steps must be positive");
        }
        for (name, r) in [("start_x", self.start_x), ("start_y", self.start_y)] {
            if !(r[0] <= r[1] && r[0] > self.collision_radius && r[1] < self.room_size - self.collision_radius) {
                return bad(&format!("{name} must be an ordered range inside the room"));
            }
        }
        if !(self.start_heading[0] <= self.start_heading[1]) {
            return bad("start_heading must be ordered");
        }
        Ok(())
    }

    /// Minimum turning radius `v / omega_max`.
    pub fn turn_radius(&self) -> f64 {
        self.speed / self.omega_max
    }

    pub fn room(&self) -> Room {
        Room::new(self.room_size, self.exit_width, self.lidar_max_range, self.lidar_rays)
    }

    pub fn noise(&self) -> LidarNoise {
        LidarNoise {
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            max_range: self.lidar_max_range,
        }
    }

    /// Centre of the exit gap, heading out of the room.
    pub fn goal(&self) -> Pose {
        Pose::new(self.room_size / 2.0, self.room_size, FRAC_PI_2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DubinsState {
    pub pose: Pose,
    pub steps: usize,
    pub outcome: Outcome,
    /// Path planned at reset, with arc-length progress.
    pub follower: Option<PathFollower>,
}

pub struct DubinsEnv {
    config: DubinsRoomConfig,
    room: Room,
    noise: LidarNoise,
    rng: ChaCha8Rng,
    state: DubinsState,
    started: bool,
}

impl DubinsEnv {
    pub fn new(config: DubinsRoomConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let room = config.room();
        let noise = config.noise();
        Ok(Self {
            room,
            noise,
            rng: ChaCha8Rng::seed_from_u64(0),
            state: DubinsState {
                pose: Pose::new(config.room_size / 2.0, config.room_size / 2.0, 0.0),
                steps: 0,
                outcome: Outcome::Running,
                follower: None,
            },
            started: false,
            config,
        })
    }

    pub fn config(&self) -> &DubinsRoomConfig {
        &self.config
    }

    pub fn room(&self) -> &Room {
        &self.room
    }

    /// Starts an episode from a chosen pose instead of a sampled one.
    pub fn reset_to(&mut self, pose: Pose, seed: u64) -> Observation {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let follower = plan_dubins(pose, self.config.goal(), self.config.turn_radius())
            .ok()
            .map(PathFollower::new);
        self.state = DubinsState {
            pose,
            steps: 0,
            outcome: Outcome::Running,
            follower,
        };
        self.started = true;
        self.observe()
    }

    fn observe(&mut self) -> Observation {
        let scan = self.room.scan(&self.state.pose);
        Observation(scan.into_iter().map(|r| corrupt(r, &self.noise, &mut self.rng)).collect())
    }
}

impl Environment for DubinsEnv {
    type State = DubinsState;

    fn observation_dim(&self) -> usize {
        self.config.lidar_rays
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_steps(&self) -> usize {
        self.config.max_steps
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &self.config;
        let x = uniform(&mut rng, c.start_x);
        let y = uniform(&mut rng, c.start_y);
        let theta = uniform(&mut rng, c.start_heading);
        self.reset_to(Pose::new(x, y, theta), rng.random())
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.state.outcome.is_done() {
            return Err(EnvError::StepAfterDone);
        }
        check_action(action, 1)?;
        let c = &self.config;
        let from = self.state.pose;
        let to = kinematics_step(from, action.0[0], c.speed, c.dt, c.omega_max);
        self.state.pose = to;
        self.state.steps += 1;
        if let Some(f) = self.state.follower.as_mut() {
            f.advance(c.speed * c.dt);
        }

        let (p0, p1) = ((from.x, from.y), (to.x, to.y));
        let (outcome, reward) = if self.room.crosses_exit(p0, p1) {
            (Outcome::Exited, 1.0)
        } else if self.room.collides(p0, p1, c.collision_radius) {
            (Outcome::Collided, -1.0)
        } else if self.state.steps >= c.max_steps {
            (Outcome::TimedOut, 0.0)
        } else {
            (Outcome::Running, 0.0)
        };
        self.state.outcome = outcome;
        Ok(StepResult::new(self.observe(), reward, outcome))
    }

    fn state(&self) -> &DubinsState {
        &self.state
    }

    fn pose(&self) -> Pose {
        self.state.pose
    }

    fn observation_scale(&self) -> f64 {
        1.0 / self.config.lidar_max_range
    }
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    range[0] + (range[1] - range[0]) * rng.random::<f64>()
}

/// Finite-state Dubins-path expert.
///
/// In replan mode it drives straight when its heading already threads the
/// exit gap with clearance, and otherwise follows the shortest Dubins word to
/// the gap centre that stays clear of the walls.
#[derive(Debug, Clone)]
pub struct DubinsExpert {
    room: Room,
    goal: Pose,
    radius: f64,
    speed: f64,
    dt: f64,
    omega_max: f64,
    clearance: f64,
    collision_radius: f64,
    mode: ExpertMode,
}

/// Clearance kept between a planned path and the walls, metres.
const PATH_CLEARANCE: f64 = 1.5;
/// Sampling step when checking a plan against the walls, metres.
const PATH_CHECK_STEP: f64 = 0.5;
/// Slack on the room bounds when checking a plan, metres.
const PATH_EPS: f64 = 1e-6;
/// Corner clearance beyond the collision radius for the last-resort
/// straight shot through the gap, metres.
const GAP_MARGIN: f64 = 0.5;

impl DubinsExpert {
    pub fn new(config: &DubinsRoomConfig) -> Self {
        Self {
            room: config.room(),
            goal: config.goal(),
            radius: config.turn_radius(),
            speed: config.speed,
            dt: config.dt,
            omega_max: config.omega_max,
            clearance: config.collision_radius + PATH_CLEARANCE,
            collision_radius: config.collision_radius,
            mode: config.expert_mode,
        }
    }

    pub fn mode(&self) -> ExpertMode {
        self.mode
    }

    /// Turn-rate command for `state`, always within `+-omega_max`.
    pub fn command(&self, state: &DubinsState) -> f64 {
        let u = match self.mode {
            ExpertMode::OpenLoop => state.follower.map_or(0.0, |f| f.command(self.speed)),
            ExpertMode::Replan => {
                let pose = &state.pose;
                let follow = |path: DubinsPath| PathFollower::new(path).averaged_command(self.speed, self.dt);
                if self.heads_through_gap(pose) {
                    0.0
                } else if let Some(path) = self.clear_plan(pose) {
                    follow(path)
                } else if self.threads_gap(pose, self.collision_radius + GAP_MARGIN) {
                    0.0
                } else {
                    self.shortest_plan(pose).map_or(0.0, follow)
                }
            }
        };
        u.clamp(-self.omega_max, self.omega_max)
    }

    /// Whether driving straight from `pose` leaves through the gap with
    /// clearance from both gap corners.
    pub fn heads_through_gap(&self, pose: &Pose) -> bool {
        self.threads_gap(pose, self.clearance)
    }

    fn threads_gap(&self, pose: &Pose, clearance: f64) -> bool {
        let (s, c) = pose.theta.sin_cos();
        if s <= 0.0 {
            return false;
        }
        let top = self.room.size;
        let x_hit = pose.x + (top - pose.y) * c / s;
        let (g0, g1) = self.room.exit_gap();
        if x_hit < g0.0 + clearance || x_hit > g1.0 - clearance {
            return false;
        }
        let hit = (x_hit, top);
        [g0, g1]
            .iter()
            .all(|&corner| point_segment_distance(corner, (pose.x, pose.y), hit) >= clearance)
    }

    /// Shortest wall-clear Dubins path to the goal, falling back to the
    /// shortest overall.
    pub fn plan(&self, pose: &Pose) -> Option<DubinsPath> {
        self.clear_plan(pose).or_else(|| self.shortest_plan(pose))
    }

    fn sorted_paths(&self, pose: &Pose) -> Vec<DubinsPath> {
        let mut paths = all_dubins_paths(*pose, self.goal, self.radius);
        paths.sort_by(|a, b| a.length().total_cmp(&b.length()));
        paths
    }

    fn clear_plan(&self, pose: &Pose) -> Option<DubinsPath> {
        self.sorted_paths(pose).into_iter().find(|p| self.path_is_clear(p))
    }

    fn shortest_plan(&self, pose: &Pose) -> Option<DubinsPath> {
        self.sorted_paths(pose).into_iter().next()
    }

    fn path_is_clear(&self, path: &DubinsPath) -> bool {
        let len = path.length();
        let n = (len / PATH_CHECK_STEP).ceil() as usize;
        // The goal sits on the top wall line, so the last sample lands a
        // rounding error either side of it.
        let (lo, hi) = (-PATH_EPS, self.room.size + PATH_EPS);
        (1..=n).all(|i| {
            let p = path.sample(len * i as f64 / n as f64);
            (lo..=hi).contains(&p.x)
                && (lo..=hi).contains(&p.y)
                && self.room.wall_distance(p.x, p.y) >= self.clearance
        })
    }
}

impl crate::policy::ExpertPolicy<DubinsState> for DubinsExpert {
    fn act(&self, state: &DubinsState) -> Action {
        Action::scalar(self.command(state))
    }
}
