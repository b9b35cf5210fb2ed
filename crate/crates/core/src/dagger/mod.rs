//! The DAgger loop: combined rollouts under a decision rule, expert labels
//! on every visited state, aggregation, retraining, and evaluation.

mod dataset;
mod rollout;
pub mod seed;

pub use dataset::{aggregate, Dataset};
pub use rollout::{rollout_combined, rollout_novice, Rollout, StepRecord};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvError, Environment};
use crate::nn::{Mlp, NetConfig, NnError};
use crate::policy::{ExpertPolicy, Novice};
use crate::rules::{Actor, DecisionRule, RuleError};
use seed::Stream;

#[derive(Debug, Error)]
pub enum DaggerError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("pair dimensions {got:?} do not match dataset dimensions {expected:?}")]
    Dimension {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("{0} needs a novice but none has been trained")]
    NoNovice(&'static str),
    #[error("invalid DAgger config: {0}")]
    InvalidConfig(String),
    #[error("dataset parse error: {0}")]
    Parse(String),
    #[error("training diverged (loss {loss:e}) after {} completed epochs", completed.len())]
    Diverged {
        loss: f64,
        completed: Vec<EpochMetrics>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DaggerConfig {
    /// Number of DAgger epochs `K`.
    pub epochs: usize,
    pub episodes_per_epoch: usize,
    /// Expert-only episodes that seed the dataset before epoch 0.
    pub bootstrap_episodes: usize,
    /// Step cap per rollout; the environment's own cap when unset.
    pub horizon: Option<usize>,
    pub eval_episodes: usize,
    /// Network hyperparameters. Input and output widths are replaced by the
    /// environment's dimensions.
    pub net: NetConfig,
    pub seed: u64,
}

impl Default for DaggerConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            episodes_per_epoch: 5,
            bootstrap_episodes: 1,
            horizon: None,
            eval_episodes: 50,
            net: NetConfig::default(),
            seed: 0,
        }
    }
}

impl DaggerConfig {
    pub fn validate(&self) -> Result<(), DaggerError> {
        let counts = [
            ("epochs", self.epochs),
            ("episodes_per_epoch", self.episodes_per_epoch),
            ("bootstrap_episodes", self.bootstrap_episodes),
            ("eval_episodes", self.eval_episodes),
            ("horizon", self.horizon.unwrap_or(1)),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(DaggerError::InvalidConfig(format!("{name} must be at least 1")));
        }
        self.net.validate()?;
        Ok(())
    }

    fn horizon_for<E: Environment>(&self, env: &E) -> usize {
        self.horizon.unwrap_or(env.max_steps())
    }

    /// Network config sized for `env`.
    pub fn net_for<E: Environment>(&self, env: &E) -> NetConfig {
        let mut net = self.net.clone();
        let last = net.layer_sizes.len() - 1;
        net.layer_sizes[0] = env.observation_dim();
        net.layer_sizes[last] = env.action_dim();
        net
    }
}

/// One row of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u32,
    /// Combined expert-novice return.
    pub safety_mean: f64,
    pub safety_std: f64,
    /// Novice-alone return.
    pub learning_mean: f64,
    pub learning_std: f64,
    /// Share of collection steps on which the expert acted.
    pub expert_action_fraction: f64,
    pub beta: Option<f64>,
    pub dataset_size: usize,
    pub train_loss: f64,
}

/// Returns from one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub combined_returns: Vec<f64>,
    pub novice_returns: Vec<f64>,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs `episodes` combined rollouts and as many novice-alone rollouts on
/// the evaluation seeds. Nothing is added to any dataset.
pub fn evaluate<E, X>(
    env: &mut E,
    expert: &X,
    novice: &Novice,
    rule: &DecisionRule,
    epoch: u32,
    episodes: usize,
    horizon: usize,
    master_seed: u64,
) -> Result<Evaluation, DaggerError>
where
    E: Environment,
    X: ExpertPolicy<E::State> + ?Sized,
{
    let mut combined_returns = Vec::with_capacity(episodes);
    let mut novice_returns = Vec::with_capacity(episodes);
    for k in 0..episodes as u64 {
        let env_seed = seed::derive(master_seed, Stream::Eval, 0, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, Stream::EvalRule, epoch as u64, k));
        let r = rollout_combined(env, expert, Some(novice), rule, epoch, env_seed, horizon, &mut rng)?;
        combined_returns.push(r.total_return);
        novice_returns.push(rollout_novice(env, novice, env_seed, horizon)?.total_return);
    }
    Ok(Evaluation {
        combined_returns,
        novice_returns,
    })
}

/// What `run_dagger` reports after the bootstrap (`epoch == None`) and after
/// each epoch.
pub struct EpochReport<'a, S> {
    pub epoch: Option<u32>,
    pub metrics: Option<&'a EpochMetrics>,
    pub rollouts: &'a [Rollout<S>],
    pub dataset: &'a Dataset,
    pub novice: &'a Novice,
}

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct DaggerRun {
    pub metrics: Vec<EpochMetrics>,
    pub dataset: Dataset,
    pub novice: Novice,
}

pub fn run_dagger<E, X>(
    config: &DaggerConfig,
    rule: &DecisionRule,
    env: &mut E,
    expert: &X,
) -> Result<DaggerRun, DaggerError>
where
    E: Environment,
    X: ExpertPolicy<E::State> + ?Sized,
{
    run_dagger_with(config, rule, env, expert, |_| {})
}

/// [`run_dagger`] with a callback after the bootstrap and every epoch.
pub fn run_dagger_with<E, X, F>(
    config: &DaggerConfig,
    rule: &DecisionRule,
    env: &mut E,
    expert: &X,
    mut on_epoch: F,
) -> Result<DaggerRun, DaggerError>
where
    E: Environment,
    X: ExpertPolicy<E::State> + ?Sized,
    F: FnMut(&EpochReport<E::State>),
{
    config.validate()?;
    rule.validate()?;
    let master = config.seed;
    let horizon = config.horizon_for(env);
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed::derive(master, Stream::Init, 0, 0));
    let net = Mlp::new(config.net_for(env), &mut init_rng)?;
    let mut novice = Novice::new(net, env.observation_scale());
    let mut dataset = Dataset::new(env.observation_dim(), env.action_dim());
    let mut metrics: Vec<EpochMetrics> = Vec::with_capacity(config.epochs);

    let mut rollouts = Vec::with_capacity(config.bootstrap_episodes);
    for k in 0..config.bootstrap_episodes as u64 {
        let env_seed = seed::derive(master, Stream::Bootstrap, 0, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master, Stream::Rule, u64::MAX, k));
        let r = rollout_combined(env, expert, None, &DecisionRule::BehaviorCloning, 0, env_seed, horizon, &mut rng)?;
        dataset.append(&r.pairs)?;
        rollouts.push(r);
    }
    let mut train_rng = ChaCha8Rng::seed_from_u64(seed::derive(master, Stream::Train, u64::MAX, 0));
    train(&mut novice, &dataset, &mut train_rng, &metrics)?;
    on_epoch(&EpochReport {
        epoch: None,
        metrics: None,
        rollouts: &rollouts,
        dataset: &dataset,
        novice: &novice,
    });

    for i in 0..config.epochs {
        let epoch = i as u32;
        let mut rollouts = Vec::with_capacity(config.episodes_per_epoch);
        let mut epoch_data = Dataset::new(dataset.obs_dim(), dataset.act_dim());
        for k in 0..config.episodes_per_epoch as u64 {
            let env_seed = seed::derive(master, Stream::Collect, i as u64, k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master, Stream::Rule, i as u64, k));
            let r = rollout_combined(env, expert, Some(&novice), rule, epoch, env_seed, horizon, &mut rng)?;
            epoch_data.append(&r.pairs)?;
            rollouts.push(r);
        }
        let steps: usize = rollouts.iter().map(|r| r.steps.len()).sum();
        let expert_steps: usize = rollouts.iter().map(|r| r.expert_steps()).sum();
        dataset = aggregate(&dataset, &epoch_data)?;

        let mut train_rng = ChaCha8Rng::seed_from_u64(seed::derive(master, Stream::Train, i as u64, 0));
        let train_loss = train(&mut novice, &dataset, &mut train_rng, &metrics)?;

        let eval = evaluate(env, expert, &novice, rule, epoch, config.eval_episodes, horizon, master)?;
        let (safety_mean, safety_std) = mean_std(&eval.combined_returns);
        let (learning_mean, learning_std) = mean_std(&eval.novice_returns);
        metrics.push(EpochMetrics {
            epoch,
            safety_mean,
            safety_std,
            learning_mean,
            learning_std,
            expert_action_fraction: if steps == 0 { 0.0 } else { expert_steps as f64 / steps as f64 },
            beta: rule.beta(epoch),
            dataset_size: dataset.len(),
            train_loss,
        });
        on_epoch(&EpochReport {
            epoch: Some(epoch),
            metrics: metrics.last(),
            rollouts: &rollouts,
            dataset: &dataset,
            novice: &novice,
        });
    }
    Ok(DaggerRun {
        metrics,
        dataset,
        novice,
    })
}

fn train<R: rand::Rng + ?Sized>(
    novice: &mut Novice,
    dataset: &Dataset,
    rng: &mut R,
    completed: &[EpochMetrics],
) -> Result<f64, DaggerError> {
    let inputs = dataset.scaled_inputs(novice.input_scale);
    let examples = dataset.examples(&inputs);
    match novice.net.train(&examples, rng) {
        Ok(report) => Ok(report.final_loss),
        Err(NnError::Diverged { loss }) => Err(DaggerError::Diverged {
            loss,
            completed: completed.to_vec(),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Share of expert-executed steps in `rollouts`.
pub fn expert_fraction<S>(rollouts: &[Rollout<S>]) -> f64 {
    let steps: usize = rollouts.iter().map(|r| r.steps.len()).sum();
    let expert = rollouts
        .iter()
        .flat_map(|r| &r.steps)
        .filter(|s| s.actor == Actor::Expert)
        .count();
    if steps == 0 {
        0.0
    } else {
        expert as f64 / steps as f64
    }
}
