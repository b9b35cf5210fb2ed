//! Episodic environments.
//!
//! An environment owns its random stream (reseeded on every `reset`) and
//! exposes its privileged state so experts can act on it while the novice
//! only sees [`Observation`]s.

mod dubins;
pub mod geometry;
pub mod lidar;
mod noise;
pub mod path;
mod pointmass;

pub use dubins::{DubinsEnv, DubinsExpert, DubinsRoomConfig, DubinsState, ExpertMode};
pub use geometry::{kinematics_step, normalize_angle, Pose};
pub use lidar::{corrupt, corrupt_unclamped, LidarNoise, Room};
pub use noise::GaussianObsNoise;
pub use path::{plan_dubins, DubinsPath, PathFollower, SegmentKind, Word};
pub use pointmass::{PointMassConfig, PointMassEnv, PointMassExpert, PointMassState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Action, Observation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error("action has {got} components, expected {expected}")]
    ActionShape { expected: usize, got: usize },
    #[error("pose ({x:.3}, {y:.3}) lies outside the room")]
    OutsideRoom { x: f64, y: f64 },
    #[error("ray index {index} out of range for {rays} rays")]
    RayIndex { index: usize, rays: usize },
    #[error("no feasible Dubins word between the given poses")]
    NoFeasiblePath,
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Running,
    Exited,
    Collided,
    TimedOut,
}

impl Outcome {
    pub fn is_done(self) -> bool {
        self != Outcome::Running
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
}

impl StepResult {
    pub fn new(observation: Observation, reward: f64, outcome: Outcome) -> Self {
        Self {
            observation,
            reward,
            done: outcome.is_done(),
            outcome,
        }
    }
}

pub trait Environment {
    /// Privileged state handed to the expert.
    type State: Clone;

    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn max_steps(&self) -> usize;

    /// Starts a new episode; the same seed always gives the same episode.
    fn reset(&mut self, seed: u64) -> Observation;
    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError>;
    fn state(&self) -> &Self::State;

    /// Planar pose for trajectory dumps.
    fn pose(&self) -> Pose;

    /// Factor applied to observations before they reach the network.
    fn observation_scale(&self) -> f64 {
        1.0
    }
}

pub(crate) fn check_action(action: &Action, expected: usize) -> Result<(), EnvError> {
    if action.len() != expected {
        return Err(EnvError::ActionShape {
            expected,
            got: action.len(),
        });
    }
    Ok(())
}
