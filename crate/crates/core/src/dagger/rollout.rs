use rand::Rng;

use super::{DaggerError, Dataset};
use crate::env::{Environment, Outcome, Pose};
use crate::policy::{Action, ExpertPolicy, Novice};
use crate::rules::{Actor, DecisionRule, Diagnostics, NoviceOffer, NoviceQuery};

/// One executed timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// Pose before the action was applied.
    pub pose: Pose,
    /// Expert label, when the expert was queried.
    pub expert_action: Option<Action>,
    pub executed: Action,
    pub actor: Actor,
    pub diagnostics: Diagnostics,
    pub reward: f64,
}

/// A finished episode.
#[derive(Debug, Clone)]
pub struct Rollout<S> {
    /// Observation and expert label at every visited state.
    pub pairs: Dataset,
    /// Privileged state behind each pair.
    pub states: Vec<S>,
    pub steps: Vec<StepRecord>,
    pub total_return: f64,
    pub outcome: Outcome,
    pub final_pose: Pose,
}

impl<S> Rollout<S> {
    pub fn expert_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.actor == Actor::Expert).count()
    }
}

/// Runs one episode in which the expert labels every state and `rule`
/// chooses who acts. Stops at termination or after `horizon` steps.
#[allow(clippy::too_many_arguments)]
pub fn rollout_combined<E, X, R>(
    env: &mut E,
    expert: &X,
    novice: Option<&Novice>,
    rule: &DecisionRule,
    epoch: u32,
    seed: u64,
    horizon: usize,
    rng: &mut R,
) -> Result<Rollout<E::State>, DaggerError>
where
    E: Environment,
    X: ExpertPolicy<E::State> + ?Sized,
    R: Rng + ?Sized,
{
    let mut obs = env.reset(seed);
    let mut out = Rollout {
        pairs: Dataset::new(env.observation_dim(), env.action_dim()),
        states: Vec::new(),
        steps: Vec::new(),
        total_return: 0.0,
        outcome: Outcome::Running,
        final_pose: env.pose(),
    };
    for t in 0..horizon {
        let a_exp = expert.act(env.state());
        let offer = match (rule.novice_query(), novice) {
            (NoviceQuery::None, _) => NoviceOffer::None,
            (_, None) => return Err(DaggerError::NoNovice(rule.name())),
            (NoviceQuery::Deterministic, Some(n)) => NoviceOffer::Action(n.act_deterministic(&obs)?),
            (NoviceQuery::Samples(k), Some(n)) => NoviceOffer::Samples(n.sample(&obs, k, rng)?),
        };
        let decision = rule.decide(&a_exp, &offer, epoch, rng);
        let pose = env.pose();
        out.states.push(env.state().clone());
        out.pairs.push(obs, a_exp.clone())?;
        let step = env.step(&decision.chosen_action)?;
        out.total_return += step.reward;
        out.steps.push(StepRecord {
            t,
            pose,
            expert_action: Some(a_exp),
            executed: decision.chosen_action,
            actor: decision.actor,
            diagnostics: decision.diagnostics,
            reward: step.reward,
        });
        out.outcome = step.outcome;
        obs = step.observation;
        if step.done {
            break;
        }
    }
    out.final_pose = env.pose();
    Ok(out)
}

/// Runs one episode with the novice acting alone, dropout off. The expert
/// is not consulted, so the rollout carries no labels.
pub fn rollout_novice<E: Environment>(
    env: &mut E,
    novice: &Novice,
    seed: u64,
    horizon: usize,
) -> Result<Rollout<E::State>, DaggerError> {
    let mut obs = env.reset(seed);
    let mut out = Rollout {
        pairs: Dataset::new(env.observation_dim(), env.action_dim()),
        states: Vec::new(),
        steps: Vec::new(),
        total_return: 0.0,
        outcome: Outcome::Running,
        final_pose: env.pose(),
    };
    for t in 0..horizon {
        let a = novice.act_deterministic(&obs)?;
        let pose = env.pose();
        out.states.push(env.state().clone());
        let step = env.step(&a)?;
        out.total_return += step.reward;
        out.steps.push(StepRecord {
            t,
            pose,
            expert_action: None,
            executed: a,
            actor: Actor::Novice,
            diagnostics: Diagnostics::default(),
            reward: step.reward,
        });
        out.outcome = step.outcome;
        obs = step.observation;
        if step.done {
            break;
        }
    }
    out.final_pose = env.pose();
    Ok(out)
}
