//! Additive Gaussian noise on the novice's observations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::geometry::Pose;
use super::{EnvError, Environment, StepResult};
use crate::policy::{Action, Observation};

/// Wraps an environment and adds i.i.d. `N(0, sigma^2)` to every observation
/// component. The privileged state, rewards, and termination are untouched.
pub struct GaussianObsNoise<E> {
    inner: E,
    sigma: f64,
    rng: ChaCha8Rng,
}

/// Stream tag mixed into the reset seed for the wrapper's own noise.
const NOISE_STREAM: u64 = 0x6f62_735f_6e6f_6973;

impl<E: Environment> GaussianObsNoise<E> {
    pub fn new(inner: E, sigma: f64) -> Result<Self, EnvError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(EnvError::InvalidConfig("noise sigma must be non-negative".into()));
        }
        Ok(Self {
            inner,
            sigma,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn perturb(&mut self, mut obs: Observation) -> Observation {
        if self.sigma > 0.0 {
            let normal = Normal::new(0.0, self.sigma).expect("validated sigma");
            for v in obs.0.iter_mut() {
                *v += normal.sample(&mut self.rng);
            }
        }
        obs
    }
}

impl<E: Environment> Environment for GaussianObsNoise<E> {
    type State = E::State;

    fn observation_dim(&self) -> usize {
        self.inner.observation_dim()
    }

    fn action_dim(&self) -> usize {
        self.inner.action_dim()
    }

    fn max_steps(&self) -> usize {
        self.inner.max_steps()
    }

    fn reset(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha8Rng::seed_from_u64(seed ^ NOISE_STREAM);
        let obs = self.inner.reset(seed);
        self.perturb(obs)
    }

    fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        let mut r = self.inner.step(action)?;
        r.observation = self.perturb(r.observation);
        Ok(r)
    }

    fn state(&self) -> &E::State {
        self.inner.state()
    }

    fn pose(&self) -> Pose {
        self.inner.pose()
    }

    fn observation_scale(&self) -> f64 {
        self.inner.observation_scale()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{PointMassConfig, PointMassEnv};
    use super::*;

    #[test]
    fn zero_sigma_is_bitwise_identity() {
        let cfg = PointMassConfig::default();
        let mut plain = PointMassEnv::new(cfg.clone()).unwrap();
        let mut noisy = GaussianObsNoise::new(PointMassEnv::new(cfg).unwrap(), 0.0).unwrap();
        assert_eq!(plain.reset(3), noisy.reset(3));
        for _ in 0..10 {
            let a = Action::scalar(0.1);
            assert_eq!(plain.step(&a).unwrap(), noisy.step(&a).unwrap());
        }
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(GaussianObsNoise::new(PointMassEnv::new(PointMassConfig::default()).unwrap(), -1.0).is_err());
    }

    #[test]
    fn reward_and_done_pass_through() {
        let cfg = PointMassConfig::default();
        for seed in 0..100 {
            let mut plain = PointMassEnv::new(cfg.clone()).unwrap();
            let mut noisy = GaussianObsNoise::new(PointMassEnv::new(cfg.clone()).unwrap(), 0.1).unwrap();
            plain.reset(seed);
            noisy.reset(seed);
            loop {
                let a = Action::scalar(0.3);
                let (p, n) = (plain.step(&a).unwrap(), noisy.step(&a).unwrap());
                assert_eq!((p.reward, p.done, p.outcome), (n.reward, n.done, n.outcome));
                assert_eq!(plain.state(), noisy.state());
                if p.done {
                    break;
                }
            }
        }
    }
}
