//! Observations, actions, and the two kinds of policy.
//!
//! Experts act on privileged environment state; the novice acts on
//! observations through a trained [`Mlp`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{Mlp, NnError};

/// What the novice sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

/// A continuous control (angular velocity for the Dubins car).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action(pub Vec<f64>);

impl Observation {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Action {
    pub fn scalar(u: f64) -> Self {
        Self(vec![u])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `N` MC-dropout actions and their componentwise mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSampleSet {
    samples: Vec<Action>,
    mean: Action,
}

impl ActionSampleSet {
    /// Panics on an empty or ragged sample list.
    pub fn new(samples: Vec<Action>) -> Self {
        assert!(!samples.is_empty(), "need at least one sample");
        let dim = samples[0].len();
        assert!(samples.iter().all(|s| s.len() == dim), "ragged samples");
        let mut mean = vec![0.0; dim];
        for s in &samples {
            for (m, v) in mean.iter_mut().zip(s.values()) {
                *m += v;
            }
        }
        let n = samples.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Self {
            samples,
            mean: Action(mean),
        }
    }

    pub fn samples(&self) -> &[Action] {
        &self.samples
    }

    pub fn mean(&self) -> &Action {
        &self.mean
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A deterministic controller with access to the true environment state.
pub trait ExpertPolicy<S> {
    fn act(&self, state: &S) -> Action;
}

impl<S, F: Fn(&S) -> Action> ExpertPolicy<S> for F {
    fn act(&self, state: &S) -> Action {
        self(state)
    }
}

/// The learned policy: a network plus a fixed input scaling.
///
/// Raw lidar ranges are tens of metres; the network sees them multiplied by
/// `input_scale` so activations start out O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct Novice {
    pub net: Mlp,
    pub input_scale: f64,
}

impl Novice {
    pub fn new(net: Mlp, input_scale: f64) -> Self {
        Self { net, input_scale }
    }

    pub fn scale_input(&self, obs: &Observation) -> Vec<f64> {
        obs.values().iter().map(|v| v * self.input_scale).collect()
    }

    /// Dropout-off action, used when the novice acts alone.
    pub fn act_deterministic(&self, obs: &Observation) -> Result<Action, NnError> {
        novice_act_deterministic(&self.net, &Observation(self.scale_input(obs)))
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        obs: &Observation,
        n: usize,
        rng: &mut R,
    ) -> Result<ActionSampleSet, NnError> {
        novice_sample(&self.net, &Observation(self.scale_input(obs)), n, rng)
    }
}

/// `n` independent stochastic passes with fresh masks. `n` must be >= 1.
pub fn novice_sample<R: Rng + ?Sized>(
    net: &Mlp,
    obs: &Observation,
    n: usize,
    rng: &mut R,
) -> Result<ActionSampleSet, NnError> {
    assert!(n >= 1, "sample count must be positive");
    let samples = (0..n)
        .map(|_| net.forward_stochastic(obs.values(), rng).map(Action))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ActionSampleSet::new(samples))
}

pub fn novice_act_deterministic(net: &Mlp, obs: &Observation) -> Result<Action, NnError> {
    net.forward_deterministic(obs.values()).map(Action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(dropout: f64, seed: u64) -> Mlp {
        let cfg = NetConfig {
            layer_sizes: vec![3, 16, 16, 1],
            dropout,
            ..NetConfig::default()
        };
        Mlp::new(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn no_dropout_samples_are_a_point_mass() {
        let net = net(0.0, 1);
        let obs = Observation(vec![0.2, -0.4, 1.5]);
        let det = novice_act_deterministic(&net, &obs).unwrap();
        let set = novice_sample(&net, &obs, 25, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(set.samples().iter().all(|s| *s == det));
    }

    #[test]
    fn single_sample_mean_is_the_sample() {
        let net = net(0.3, 1);
        let obs = Observation(vec![0.2, -0.4, 1.5]);
        let set = novice_sample(&net, &obs, 1, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(set.mean(), &set.samples()[0]);
    }

    #[test]
    fn mean_is_componentwise_average() {
        let set = ActionSampleSet::new(vec![
            Action(vec![1.0, 2.0]),
            Action(vec![3.0, -2.0]),
            Action(vec![2.0, 3.0]),
        ]);
        assert_eq!(set.mean(), &Action(vec![2.0, 1.0]));
    }

    #[test]
    fn sampling_does_not_touch_parameters() {
        let net = net(0.2, 7);
        let before = net.checksum();
        let obs = Observation(vec![1.0, 0.0, -1.0]);
        novice_sample(&net, &obs, 100, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(net.checksum(), before);
    }

    #[test]
    fn sample_mean_is_self_consistent_across_seeds() {
        // Two independent 10^4-sample runs: their means differ by less than
        // three standard errors of the difference.
        let net = net(0.1, 9);
        let obs = Observation(vec![0.5, 0.5, -0.25]);
        let run = |seed| {
            let set = novice_sample(&net, &obs, 10_000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let xs: Vec<f64> = set.samples().iter().map(|a| a.0[0]).collect();
            let n = xs.len() as f64;
            let mean = set.mean().0[0];
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var / n)
        };
        let (m1, v1) = run(100);
        let (m2, v2) = run(200);
        assert!((m1 - m2).abs() <= 3.0 * (v1 + v2).sqrt(), "{m1} vs {m2}");
    }

    #[test]
    fn zero_and_identity_networks() {
        let zero = Mlp::zeros(NetConfig { layer_sizes: vec![2, 4, 2], ..NetConfig::default() }).unwrap();
        let obs = Observation(vec![3.0, -1.0]);
        assert_eq!(novice_act_deterministic(&zero, &obs).unwrap(), Action(vec![0.0, 0.0]));

        let l = Mlp::layer(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let id = Mlp::from_layers(
            NetConfig { layer_sizes: vec![2, 2], ..NetConfig::default() },
            vec![l],
        )
        .unwrap();
        assert_eq!(novice_act_deterministic(&id, &obs).unwrap(), Action(obs.0.clone()));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = net(0.1, 1);
        let obs = Observation(vec![1.0]);
        assert!(novice_sample(&net, &obs, 3, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
