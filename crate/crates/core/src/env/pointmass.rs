//! One-dimensional point mass: a fast toy with a proportional expert.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::Pose;
use super::{check_action, EnvError, Environment, Outcome, StepResult};
use crate::policy::{Action, ExpertPolicy, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointMassConfig {
    pub dt: f64,
    /// Expert gain `k` in `u = -k x`.
    pub gain: f64,
    pub max_steps: usize,
    /// Leaving `[-bound, bound]` ends the episode as a collision.
    pub bound: f64,
    /// Starts are uniform on `[-start_range, start_range]`.
    pub start_range: f64,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            gain: 1.0,
            max_steps: 50,
            bound: 5.0,
            start_range: 1.0,
        }
    }
}

impl PointMassConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let ok = self.dt > 0.0
            && self.gain >= 0.0
            && self.max_steps > 0
            && self.bound > 0.0
            && (0.0..self.bound).contains(&self.start_range);
        if ok {
            Ok(())
        } else {
            Err(EnvError::InvalidConfig("point mass parameters out of range".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMassState {
    pub x: f64,
    pub steps: usize,
    pub outcome: Outcome,
}

/// `x += u dt`, reward `-x^2` after each step.
pub struct PointMassEnv {
    config: PointMassConfig,
    state: PointMassState,
    started: bool,
}

impl PointMassEnv {
    pub fn new(config: PointMassConfig) -> Result<Self, EnvError> {
        config.validate()?;
        Ok(Self {
            config,
            state: PointMassState {
                x: 0.0,
                steps: 0,
                outcome: Outcome::Running,
            },
            started: false,
        })
    }

    pub fn config(&self) -> &PointMassConfig {
        &self.config
    }

    pub fn reset_to(&mut self, x: f64) -> Observation {
        self.state = PointMassState {
            x,
            steps: 0,
            outcome: Outcome::Running,
        };
        self.started = true;
        Observation(vec![x])
    }
}

impl Environment for PointMassEnv {
    type State = PointMassState;

    fn observation_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_steps(&self) -> usize {
        self.config.max_steps
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = self.config.start_range;
        let x = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        self.reset_to(x)
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.state.outcome.is_done() {
            return Err(EnvError::StepAfterDone);
        }
        check_action(action, 1)?;
        let s = &mut self.state;
        s.x += action.0[0] * self.config.dt;
        s.steps += 1;
        s.outcome = if s.x.abs() > self.config.bound {
            Outcome::Collided
        } else if s.steps >= self.config.max_steps {
            Outcome::TimedOut
        } else {
            Outcome::Running
        };
        Ok(StepResult::new(Observation(vec![s.x]), -s.x * s.x, s.outcome))
    }

    fn state(&self) -> &PointMassState {
        &self.state
    }

    fn pose(&self) -> Pose {
        Pose::new(self.state.x, 0.0, 0.0)
    }
}

/// Proportional controller `u = -k x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassExpert {
    pub gain: f64,
}

impl ExpertPolicy<PointMassState> for PointMassExpert {
    fn act(&self, state: &PointMassState) -> Action {
        Action::scalar(-self.gain * state.x)
    }
}
