use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Planar pose; `theta` is kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// Smallest signed difference `a - b`, in `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// One explicit-Euler step of unicycle kinematics.
///
/// `u` is clamped to `[-omega_max, omega_max]` before integrating.
pub fn kinematics_step(pose: Pose, u: f64, v: f64, dt: f64, omega_max: f64) -> Pose {
    let u = u.clamp(-omega_max, omega_max);
    Pose {
        x: pose.x + v * pose.theta.cos() * dt,
        y: pose.y + v * pose.theta.sin() * dt,
        theta: normalize_angle(pose.theta + u * dt),
    }
}

/// Point-to-segment distance.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.0 - (a.0 + t * dx)).hypot(p.1 - (a.1 + t * dy))
}

/// Whether the closed segments `p1-p2` and `q1-q2` intersect.
pub fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: (f64, f64), b: (f64, f64), p: (f64, f64), d: f64| {
        d == 0.0
            && p.0 >= a.0.min(b.0)
            && p.0 <= a.0.max(b.0)
            && p.1 >= a.1.min(b.1)
            && p.1 <= a.1.max(b.1)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn straight_motion() {
        let p = kinematics_step(Pose::new(1.0, 2.0, 0.0), 0.0, 10.0, 0.1, 1.0);
        assert!((p.x - 2.0).abs() < 1e-12);
        assert_eq!((p.y, p.theta), (2.0, 0.0));
    }

    #[test]
    fn zero_speed_only_turns() {
        let p = kinematics_step(Pose::new(3.0, 4.0, 0.5), 0.7, 0.0, 0.1, 1.0);
        assert_eq!((p.x, p.y), (3.0, 4.0));
        assert!((p.theta - 0.57).abs() < 1e-12);
    }

    #[test]
    fn command_is_clamped() {
        let p = kinematics_step(Pose::new(0.0, 0.0, 0.0), 5.0, 0.0, 0.1, 1.0);
        assert!((p.theta - 0.1).abs() < 1e-15);
    }

    #[test]
    fn heading_trace_matches_closed_form() {
        // u = omega_max for 100 steps: theta(t) = theta0 + u t, wrapped.
        let (u, dt, theta0) = (1.0, 0.1, -0.3);
        let mut p = Pose::new(50.0, 50.0, theta0);
        for k in 1..=100 {
            p = kinematics_step(p, u, 10.0, dt, 1.0);
            let expected = normalize_angle(theta0 + u * dt * k as f64);
            assert!(angle_diff(p.theta, expected).abs() < 1e-12, "step {k}");
        }
    }

    #[test]
    fn intersection_cases() {
        assert!(segments_intersect((0.0, 0.0), (2.0, 2.0), (0.0, 2.0), (2.0, 0.0)));
        assert!(!segments_intersect((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)));
        assert!(segments_intersect((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 1.0)));
    }

    proptest! {
        #[test]
        fn normalized_range(theta in -1e3f64..1e3) {
            let t = normalize_angle(theta);
            prop_assert!(t > -PI && t <= PI);
            prop_assert!(((theta - t) / TAU - ((theta - t) / TAU).round()).abs() < 1e-9);
        }
    }
}
