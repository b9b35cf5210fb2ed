//! Square room with a single exit gap, ray casting, and the range noise
//! model.
//!
//! The room spans `[0, size]^2`. The exit is a gap of `exit_width` centred
//! in the top wall (`y = size`).

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::geometry::{point_segment_distance, segments_intersect, Pose};
use super::EnvError;

type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub size: f64,
    pub exit_width: f64,
    pub max_range: f64,
    pub rays: usize,
    walls: Vec<(Point, Point)>,
}

impl Room {
    pub fn new(size: f64, exit_width: f64, max_range: f64, rays: usize) -> Self {
        let (g0, g1) = ((size - exit_width) / 2.0, (size + exit_width) / 2.0);
        let walls = vec![
            ((0.0, 0.0), (size, 0.0)),
            ((size, 0.0), (size, size)),
            ((size, size), (g1, size)),
            ((g0, size), (0.0, size)),
            ((0.0, size), (0.0, 0.0)),
        ];
        Self {
            size,
            exit_width,
            max_range,
            rays,
            walls,
        }
    }

    pub fn walls(&self) -> &[(Point, Point)] {
        &self.walls
    }

    /// Endpoints of the exit gap, left then right.
    pub fn exit_gap(&self) -> (Point, Point) {
        let (g0, g1) = (
            (self.size - self.exit_width) / 2.0,
            (self.size + self.exit_width) / 2.0,
        );
        ((g0, self.size), (g1, self.size))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.size).contains(&x) && (0.0..=self.size).contains(&y)
    }

    pub fn ray_angle(&self, pose: &Pose, index: usize) -> f64 {
        pose.theta + TAU * index as f64 / self.rays as f64
    }

    /// Exact range along ray `index`, capped at the maximum range. Rays
    /// leaving through the exit see nothing and return the cap.
    pub fn raycast(&self, pose: &Pose, index: usize) -> Result<f64, EnvError> {
        if !self.contains(pose.x, pose.y) {
            return Err(EnvError::OutsideRoom { x: pose.x, y: pose.y });
        }
        if index >= self.rays {
            return Err(EnvError::RayIndex {
                index,
                rays: self.rays,
            });
        }
        Ok(self.cast(pose.x, pose.y, self.ray_angle(pose, index)))
    }

    /// Ray cast from any point, inside the room or not.
    pub fn cast(&self, x: f64, y: f64, angle: f64) -> f64 {
        let (dx, dy) = (angle.cos(), angle.sin());
        let mut best = self.max_range;
        for &((ax, ay), (bx, by)) in &self.walls {
            let (ex, ey) = (bx - ax, by - ay);
            let denom = dx * ey - dy * ex;
            if denom.abs() < 1e-15 {
                continue;
            }
            // Solve p + t d = a + s e.
            let (wx, wy) = (ax - x, ay - y);
            let t = (wx * ey - wy * ex) / denom;
            let s = (wx * dy - wy * dx) / denom;
            if t >= 0.0 && (0.0..=1.0).contains(&s) && t < best {
                best = t;
            }
        }
        best
    }

    /// True ranges on every ray.
    pub fn scan(&self, pose: &Pose) -> Vec<f64> {
        (0..self.rays)
            .map(|i| self.cast(pose.x, pose.y, self.ray_angle(pose, i)))
            .collect()
    }

    pub fn wall_distance(&self, x: f64, y: f64) -> f64 {
        self.walls
            .iter()
            .map(|&(a, b)| point_segment_distance((x, y), a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether moving from `from` to `to` crosses a wall or ends within
    /// `radius` of one.
    pub fn collides(&self, from: Point, to: Point, radius: f64) -> bool {
        self.wall_distance(to.0, to.1) < radius
            || self
                .walls
                .iter()
                .any(|&(a, b)| segments_intersect(from, to, a, b))
    }

    /// Whether the motion `from -> to` crosses the exit gap line outward.
    pub fn crosses_exit(&self, from: Point, to: Point) -> bool {
        let (g0, g1) = self.exit_gap();
        from.1 <= self.size && to.1 > self.size && segments_intersect(from, to, g0, g1)
    }
}

/// Range noise: additive and multiplicative Gaussian terms, then clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarNoise {
    /// Additive standard deviation, metres.
    pub sigma1: f64,
    /// Multiplicative standard deviation, metres per metre.
    pub sigma2: f64,
    /// Maximum range; corrupted readings are clamped to `[0, max_range]`.
    pub max_range: f64,
}

/// `z1 + (1 + z2) x` with `z1 ~ N(0, sigma1)`, `z2 ~ N(0, sigma2)` drawn
/// independently.
pub fn corrupt_unclamped<R: Rng + ?Sized>(x: f64, noise: &LidarNoise, rng: &mut R) -> f64 {
    let z1 = gaussian(noise.sigma1, rng);
    let z2 = gaussian(noise.sigma2, rng);
    z1 + (1.0 + z2) * x
}

/// Corrupted reading clamped to `[0, max_range]`.
pub fn corrupt<R: Rng + ?Sized>(x: f64, noise: &LidarNoise, rng: &mut R) -> f64 {
    corrupt_unclamped(x, noise, rng).clamp(0.0, noise.max_range)
}

fn gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}
