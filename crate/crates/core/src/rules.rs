//! Expert/novice handoff rules.
//!
//! Every rule receives the expert's action and whatever the novice offered
//! and returns a [`Decision`] naming who acts. Diagnostics are filled in on
//! every call so rollouts can log them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Action, ActionSampleSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("beta0 must lie in [0, 1], got {0}")]
    Beta0(f64),
    #[error("lambda must lie in (0, 1), got {0}")]
    Lambda(f64),
    #[error("tau must be nonnegative and finite, got {0}")]
    Tau(f64),
    #[error("p must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("sample count N must be >= 1")]
    SampleCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Actor {
    Expert,
    Novice,
}

impl Actor {
    pub fn as_str(self) -> &'static str {
        match self {
            Actor::Expert => "expert",
            Actor::Novice => "novice",
        }
    }
}

/// Distance used for ball membership and thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionNorm {
    #[default]
    Euclidean,
    Max,
}

impl ActionNorm {
    pub fn distance(self, a: &Action, b: &Action) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.values().iter().zip(b.values()).map(|(x, y)| x - y);
        match self {
            ActionNorm::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            ActionNorm::Max => diffs.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

/// Per-step numbers behind a decision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Fraction of MC-dropout samples inside the tau-ball.
    pub p_hat: Option<f64>,
    /// Distance between the expert action and the novice action considered.
    pub distance: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub chosen_action: Action,
    pub actor: Actor,
    pub diagnostics: Diagnostics,
}

impl Decision {
    fn expert(a_exp: &Action, diagnostics: Diagnostics) -> Self {
        Self {
            chosen_action: a_exp.clone(),
            actor: Actor::Expert,
            diagnostics,
        }
    }

    fn novice(a_nov: &Action, diagnostics: Diagnostics) -> Self {
        Self {
            chosen_action: a_nov.clone(),
            actor: Actor::Novice,
            diagnostics,
        }
    }
}

/// Geometric decay of the expert probability across DAgger epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanillaSchedule {
    pub beta0: f64,
    pub lambda: f64,
    pub epoch: u32,
}

impl VanillaSchedule {
    pub fn validate(&self) -> Result<(), RuleError> {
        if !(0.0..=1.0).contains(&self.beta0) {
            return Err(RuleError::Beta0(self.beta0));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(RuleError::Lambda(self.lambda));
        }
        Ok(())
    }
}

/// `lambda^i * beta0`.
pub fn beta_at(schedule: &VanillaSchedule) -> f64 {
    schedule.lambda.powi(schedule.epoch as i32) * schedule.beta0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropoutRuleParams {
    pub tau: f64,
    pub p: f64,
    pub n: usize,
}

impl DropoutRuleParams {
    pub fn validate(&self) -> Result<(), RuleError> {
        validate_tau(self.tau)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(RuleError::Probability(self.p));
        }
        if self.n == 0 {
            return Err(RuleError::SampleCount);
        }
        Ok(())
    }
}

pub fn validate_tau(tau: f64) -> Result<(), RuleError> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(RuleError::Tau(tau))
    }
}

/// Expert with probability `beta_i`, decided by one uniform draw.
pub fn dr_vanilla<R: Rng + ?Sized>(
    a_exp: &Action,
    a_nov: &Action,
    beta: f64,
    rng: &mut R,
) -> Decision {
    // z ~ Uniform(0, 1]; the expert acts iff z <= beta, so beta = 0 never
    // picks the expert and beta = 1 always does.
    let z = 1.0 - rng.random::<f64>();
    let diagnostics = Diagnostics {
        beta: Some(beta),
        ..Diagnostics::default()
    };
    if z <= beta {
        Decision::expert(a_exp, diagnostics)
    } else {
        Decision::novice(a_nov, diagnostics)
    }
}

/// Novice iff its action lies in the closed `tau`-ball around the expert's.
pub fn dr_safedagger_star(a_exp: &Action, a_nov: &Action, tau: f64, norm: ActionNorm) -> Decision {
    let d = norm.distance(a_exp, a_nov);
    let diagnostics = Diagnostics {
        distance: Some(d),
        ..Diagnostics::default()
    };
    if d <= tau {
        Decision::novice(a_nov, diagnostics)
    } else {
        Decision::expert(a_exp, diagnostics)
    }
}

/// Fraction of samples within the closed `tau`-ball around `a_exp`.
pub fn ball_fraction(a_exp: &Action, samples: &ActionSampleSet, tau: f64, norm: ActionNorm) -> f64 {
    let inside = samples
        .samples()
        .iter()
        .filter(|s| norm.distance(a_exp, s) <= tau)
        .count();
    inside as f64 / samples.len() as f64
}

/// Novice (acting with the sample mean) iff at least a fraction `p` of the
/// MC-dropout samples fall inside the `tau`-ball around the expert action.
pub fn dr_dropout(
    a_exp: &Action,
    samples: &ActionSampleSet,
    params: &DropoutRuleParams,
    norm: ActionNorm,
) -> Decision {
    let p_hat = ball_fraction(a_exp, samples, params.tau, norm);
    let diagnostics = Diagnostics {
        p_hat: Some(p_hat),
        distance: Some(norm.distance(a_exp, samples.mean())),
        beta: None,
    };
    if p_hat >= params.p {
        Decision::novice(samples.mean(), diagnostics)
    } else {
        Decision::expert(a_exp, diagnostics)
    }
}

pub fn dr_behavior_cloning(a_exp: &Action) -> Decision {
    Decision::expert(a_exp, Diagnostics::default())
}

pub fn dr_expert_labels_only(a_nov: &Action) -> Decision {
    Decision::novice(a_nov, Diagnostics::default())
}

/// A decision rule together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DecisionRule {
    BehaviorCloning,
    ExpertLabelsOnly,
    VanillaDagger {
        beta0: f64,
        lambda: f64,
    },
    SafeDaggerStar {
        tau: f64,
        #[serde(default)]
        norm: ActionNorm,
    },
    DropoutDagger {
        tau: f64,
        p: f64,
        #[serde(default = "default_samples")]
        n: usize,
        #[serde(default)]
        norm: ActionNorm,
    },
}

/// Sample count for DropoutDAgger when none is configured.
pub const DEFAULT_SAMPLES: usize = 20;

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// What the novice must supply for a rule to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoviceQuery {
    /// The rule never looks at the novice (behaviour cloning).
    None,
    Deterministic,
    Samples(usize),
}

/// The novice's offer, matching [`NoviceQuery`].
#[derive(Debug, Clone, PartialEq)]
pub enum NoviceOffer {
    None,
    Action(Action),
    Samples(ActionSampleSet),
}

impl DecisionRule {
    pub fn name(&self) -> &'static str {
        match self {
            DecisionRule::BehaviorCloning => "BehaviorCloning",
            DecisionRule::ExpertLabelsOnly => "ExpertLabelsOnly",
            DecisionRule::VanillaDagger { .. } => "VanillaDAgger",
            DecisionRule::SafeDaggerStar { .. } => "SafeDAgger*",
            DecisionRule::DropoutDagger { .. } => "DropoutDAgger",
        }
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        match *self {
            DecisionRule::BehaviorCloning | DecisionRule::ExpertLabelsOnly => Ok(()),
            DecisionRule::VanillaDagger { beta0, lambda } => VanillaSchedule {
                beta0,
                lambda,
                epoch: 0,
            }
            .validate(),
            DecisionRule::SafeDaggerStar { tau, .. } => validate_tau(tau),
            DecisionRule::DropoutDagger { tau, p, n, .. } => {
                DropoutRuleParams { tau, p, n }.validate()
            }
        }
    }

    pub fn novice_query(&self) -> NoviceQuery {
        match *self {
            DecisionRule::BehaviorCloning => NoviceQuery::None,
            DecisionRule::DropoutDagger { n, .. } => NoviceQuery::Samples(n),
            _ => NoviceQuery::Deterministic,
        }
    }

    /// Expert probability at `epoch`, for the vanilla rule only.
    pub fn beta(&self, epoch: u32) -> Option<f64> {
        match *self {
            DecisionRule::VanillaDagger { beta0, lambda } => Some(beta_at(&VanillaSchedule {
                beta0,
                lambda,
                epoch,
            })),
            _ => None,
        }
    }

    /// Panics if `offer` does not match [`DecisionRule::novice_query`].
    pub fn decide<R: Rng + ?Sized>(
        &self,
        a_exp: &Action,
        offer: &NoviceOffer,
        epoch: u32,
        rng: &mut R,
    ) -> Decision {
        match (*self, offer) {
            (DecisionRule::BehaviorCloning, _) => dr_behavior_cloning(a_exp),
            (DecisionRule::ExpertLabelsOnly, NoviceOffer::Action(a)) => dr_expert_labels_only(a),
            (DecisionRule::VanillaDagger { .. }, NoviceOffer::Action(a)) => {
                dr_vanilla(a_exp, a, self.beta(epoch).unwrap(), rng)
            }
            (DecisionRule::SafeDaggerStar { tau, norm }, NoviceOffer::Action(a)) => {
                dr_safedagger_star(a_exp, a, tau, norm)
            }
            (DecisionRule::DropoutDagger { tau, p, n, norm }, NoviceOffer::Samples(s)) => {
                dr_dropout(a_exp, s, &DropoutRuleParams { tau, p, n }, norm)
            }
            (rule, offer) => panic!("{} cannot decide from {offer:?}", rule.name()),
        }
    }
}
