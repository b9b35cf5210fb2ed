//! Dubins paths: shortest curvature-bounded paths between planar poses.
//!
//! All six words (LSL, RSR, LSR, RSL, RLR, LRL) are solved in closed form in
//! coordinates normalised by the turning radius; the planner returns the
//! shortest feasible one.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::geometry::{normalize_angle, Pose};
use super::EnvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

impl SegmentKind {
    /// Signed curvature for turning radius `radius`.
    pub fn curvature(self, radius: f64) -> f64 {
        match self {
            SegmentKind::Left => 1.0 / radius,
            SegmentKind::Straight => 0.0,
            SegmentKind::Right => -1.0 / radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Word {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl Word {
    pub const ALL: [Word; 6] = [Word::Lsl, Word::Rsr, Word::Lsr, Word::Rsl, Word::Rlr, Word::Lrl];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            Word::Lsl => [Left, Straight, Left],
            Word::Rsr => [Right, Straight, Right],
            Word::Lsr => [Left, Straight, Right],
            Word::Rsl => [Right, Straight, Left],
            Word::Rlr => [Right, Left, Right],
            Word::Lrl => [Left, Right, Left],
        }
    }
}

/// Three segments starting from `start`; lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsPath {
    pub start: Pose,
    pub radius: f64,
    pub word: Word,
    pub lengths: [f64; 3],
}

/// Advances `pose` exactly along one segment of length `len`.
fn propagate(pose: Pose, kind: SegmentKind, len: f64, radius: f64) -> Pose {
    let (x, y, th) = (pose.x, pose.y, pose.theta);
    match kind {
        SegmentKind::Straight => Pose {
            x: x + len * th.cos(),
            y: y + len * th.sin(),
            theta: th,
        },
        SegmentKind::Left => {
            let t1 = th + len / radius;
            Pose {
                x: x + radius * (t1.sin() - th.sin()),
                y: y - radius * (t1.cos() - th.cos()),
                theta: normalize_angle(t1),
            }
        }
        SegmentKind::Right => {
            let t1 = th - len / radius;
            Pose {
                x: x - radius * (t1.sin() - th.sin()),
                y: y + radius * (t1.cos() - th.cos()),
                theta: normalize_angle(t1),
            }
        }
    }
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn segments(&self) -> [SegmentKind; 3] {
        self.word.segments()
    }

    /// Segment index and kind active at arc length `s`, or `None` past the
    /// end.
    pub fn segment_at(&self, s: f64) -> Option<(usize, SegmentKind)> {
        let mut start = 0.0;
        for (i, (&len, kind)) in self.lengths.iter().zip(self.segments()).enumerate() {
            if s < start + len {
                return Some((i, kind));
            }
            start += len;
        }
        None
    }

    /// Exact pose at arc length `s` (clamped to `[0, length]`).
    pub fn sample(&self, s: f64) -> Pose {
        let mut remaining = s.clamp(0.0, self.length());
        let mut pose = self.start;
        for (&len, kind) in self.lengths.iter().zip(self.segments()) {
            let step = remaining.min(len);
            pose = propagate(pose, kind, step, self.radius);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        pose
    }

    pub fn end(&self) -> Pose {
        self.sample(self.length())
    }

    /// Heading change accumulated over arc lengths `[s0, s1]`.
    pub fn heading_change(&self, s0: f64, s1: f64) -> f64 {
        let mut start = 0.0;
        let mut total = 0.0;
        for (&len, kind) in self.lengths.iter().zip(self.segments()) {
            let (a, b) = (s0.max(start), s1.min(start + len));
            if b > a {
                total += kind.curvature(self.radius) * (b - a);
            }
            start += len;
        }
        total
    }
}

/// `x mod 2 pi` in `[0, 2 pi)`, snapping values within rounding of `2 pi`
/// to zero so a vanishing arc never turns into a full circle.
fn mod2pi(x: f64) -> f64 {
    let m = x.rem_euclid(TAU);
    if TAU - m < 1e-10 {
        0.0
    } else {
        m
    }
}

/// Normalised `(t, p, q)` for one word, or `None` if infeasible.
fn solve_word(word: Word, alpha: f64, beta: f64, d: f64) -> Option<[f64; 3]> {
    let (sa, sb, ca, cb) = (alpha.sin(), beta.sin(), alpha.cos(), beta.cos());
    let c_ab = (alpha - beta).cos();
    match word {
        Word::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)])
        }
        Word::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)])
        }
        Word::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        Word::Rsl => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        Word::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - phi + p / 2.0);
            Some([t, p, mod2pi(alpha - beta - t + p)])
        }
        Word::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - phi + p / 2.0);
            Some([t, p, mod2pi(beta - alpha - t + p)])
        }
    }
}

/// The given word between two poses, if it exists.
pub fn dubins_word(start: Pose, goal: Pose, radius: f64, word: Word) -> Option<DubinsPath> {
    let (dx, dy) = (goal.x - start.x, goal.y - start.y);
    let d = dx.hypot(dy) / radius;
    let phi = if d > 0.0 { dy.atan2(dx) } else { 0.0 };
    let alpha = mod2pi(start.theta - phi);
    let beta = mod2pi(goal.theta - phi);
    solve_word(word, alpha, beta, d).map(|tpq| DubinsPath {
        start,
        radius,
        word,
        lengths: tpq.map(|v| v * radius),
    })
}

/// Every feasible word between two poses.
pub fn all_dubins_paths(start: Pose, goal: Pose, radius: f64) -> Vec<DubinsPath> {
    Word::ALL
        .iter()
        .filter_map(|&w| dubins_word(start, goal, radius, w))
        .collect()
}

/// Shortest feasible Dubins path.
///
/// Coincident poses give the zero-length path.
pub fn plan_dubins(start: Pose, goal: Pose, radius: f64) -> Result<DubinsPath, EnvError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(EnvError::InvalidConfig("turning radius must be positive".into()));
    }
    if start.distance(&goal) == 0.0 && normalize_angle(start.theta - goal.theta) == 0.0 {
        return Ok(DubinsPath {
            start,
            radius,
            word: Word::Lsl,
            lengths: [0.0; 3],
        });
    }
    all_dubins_paths(start, goal, radius)
        .into_iter()
        .min_by(|a, b| a.length().total_cmp(&b.length()))
        .ok_or(EnvError::NoFeasiblePath)
}

/// Finite-state path tracker: advances by arc length and emits the turn rate
/// of the active segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFollower {
    pub path: DubinsPath,
    /// Arc length travelled so far.
    pub progress: f64,
}

impl PathFollower {
    pub fn new(path: DubinsPath) -> Self {
        Self {
            path,
            progress: 0.0,
        }
    }

    /// `+v/R`, `0`, or `-v/R` by active segment; `0` once past the end.
    pub fn command(&self, speed: f64) -> f64 {
        match self.path.segment_at(self.progress) {
            Some((_, kind)) => speed * kind.curvature(self.path.radius),
            None => 0.0,
        }
    }

    /// Turn rate reproducing the path's exact heading change over the next
    /// `speed * dt` of arc length.
    pub fn averaged_command(&self, speed: f64, dt: f64) -> f64 {
        let ds = speed * dt;
        self.path.heading_change(self.progress, self.progress + ds) / dt
    }

    pub fn advance(&mut self, distance: f64) {
        self.progress += distance;
    }

    pub fn finished(&self) -> bool {
        self.progress >= self.path.length()
    }
}

#[cfg(test)]
mod tests {
    use super::super::geometry::{angle_diff, kinematics_step};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn reaches(path: &DubinsPath, goal: &Pose, tol: f64) -> bool {
        let end = path.end();
        end.distance(goal) < tol && angle_diff(end.theta, goal.theta).abs() < tol
    }

    #[test]
    fn collinear_goal_is_a_straight_line() {
        let start = Pose::new(10.0, 20.0, 0.3);
        let goal = Pose::new(10.0 + 50.0 * 0.3f64.cos(), 20.0 + 50.0 * 0.3f64.sin(), 0.3);
        let path = plan_dubins(start, goal, 10.0).unwrap();
        assert!(path.lengths[0].abs() < 1e-9 && path.lengths[2].abs() < 1e-9, "{path:?}");
        assert!((path.lengths[1] - 50.0).abs() < 1e-9);
        assert_eq!(path.segments()[1], SegmentKind::Straight);
    }

    #[test]
    fn coincident_poses_give_zero_length() {
        let p = Pose::new(3.0, 4.0, 1.0);
        assert_eq!(plan_dubins(p, p, 10.0).unwrap().length(), 0.0);
    }

    #[test]
    fn u_turn_is_a_half_circle() {
        // Facing east, goal 2R to the north facing west: one left half turn.
        let path = plan_dubins(Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 20.0, PI), 10.0).unwrap();
        assert!((path.length() - PI * 10.0).abs() < 1e-9, "{path:?}");
        assert_eq!(path.word.segments()[0], SegmentKind::Left);
    }

    #[test]
    fn every_feasible_word_reaches_the_goal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let start = Pose::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), rng.random_range(-PI..PI));
            let goal = Pose::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), rng.random_range(-PI..PI));
            let paths = all_dubins_paths(start, goal, 10.0);
            assert!(!paths.is_empty());
            for p in &paths {
                assert!(reaches(p, &goal, 1e-6), "{p:?} -> {goal:?}");
                assert!(p.lengths.iter().all(|&l| l >= 0.0));
            }
            let best = plan_dubins(start, goal, 10.0).unwrap();
            assert!(best.length() + 1e-9 >= start.distance(&goal));
        }
    }

    #[test]
    fn follower_commands() {
        let path = DubinsPath {
            start: Pose::new(0.0, 0.0, 0.0),
            radius: 10.0,
            word: Word::Lsr,
            lengths: [5.0, 7.0, 3.0],
        };
        let mut f = PathFollower::new(path);
        assert_eq!(f.command(10.0), 1.0);
        f.advance(6.0);
        assert_eq!(f.command(10.0), 0.0);
        f.advance(7.0);
        assert_eq!(f.command(10.0), -1.0);
        f.advance(10.0);
        assert!(f.finished());
        assert_eq!(f.command(10.0), 0.0);
    }

    #[test]
    fn averaged_command_blends_segments() {
        let path = DubinsPath {
            start: Pose::new(0.0, 0.0, 0.0),
            radius: 10.0,
            word: Word::Lsl,
            lengths: [0.25, 10.0, 1.0],
        };
        let f = PathFollower::new(path);
        // First metre: 0.25 m of left arc then straight.
        assert!((f.averaged_command(10.0, 0.1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn euler_rollout_of_a_quarter_turn() {
        let start = Pose::new(0.0, 0.0, 0.0);
        let goal = Pose::new(10.0, 10.0, FRAC_PI_2);
        let path = plan_dubins(start, goal, 10.0).unwrap();
        let (v, dt) = (1.0, 1e-4);
        let mut f = PathFollower::new(path);
        let mut pose = start;
        while !f.finished() {
            let u = f.averaged_command(v, dt);
            pose = kinematics_step(pose, u, v, dt, v / path.radius);
            f.advance(v * dt);
        }
        assert!(pose.distance(&goal) < 1e-3, "{pose:?}");
    }
}
