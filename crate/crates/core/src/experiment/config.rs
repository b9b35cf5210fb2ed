//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "dubins-sweep"
//! environment = "dubins"
//!
//! [dagger]
//! epochs = 10
//! eval_episodes = 20
//! seed = 7
//!
//! [[algorithm]]
//! rule = "dropout_dagger"
//! tau = 0.3
//! p = 0.6
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::dagger::DaggerConfig;
use crate::env::{DubinsRoomConfig, PointMassConfig};
use crate::rules::{ActionNorm, DecisionRule, DEFAULT_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    #[default]
    Dubins,
    PointMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    BehaviorCloning,
    ExpertLabelsOnly,
    VanillaDagger,
    SafeDaggerStar,
    DropoutDagger,
}

/// One `[[algorithm]]` entry. Parameters left out take the rule's default;
/// parameters the rule does not use are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub rule: RuleKind,
    /// Row label in result files; the rule name when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<ActionNorm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

pub const DROPOUT_TAU: f64 = 0.3;
pub const DROPOUT_P: f64 = 0.6;
pub const SAFEDAGGER_TAU: f64 = 0.6;
pub const VANILLA_BETA0: f64 = 1.0;
pub const VANILLA_LAMBDA: f64 = 0.63;

impl AlgorithmSpec {
    pub fn new(rule: RuleKind) -> Self {
        Self {
            rule,
            label: None,
            tau: None,
            p: None,
            samples: None,
            norm: None,
            beta0: None,
            lambda: None,
        }
    }

    pub fn from_rule(rule: &DecisionRule) -> Self {
        let mut spec = match *rule {
            DecisionRule::BehaviorCloning => Self::new(RuleKind::BehaviorCloning),
            DecisionRule::ExpertLabelsOnly => Self::new(RuleKind::ExpertLabelsOnly),
            DecisionRule::VanillaDagger { beta0, lambda } => Self {
                beta0: Some(beta0),
                lambda: Some(lambda),
                ..Self::new(RuleKind::VanillaDagger)
            },
            DecisionRule::SafeDaggerStar { tau, norm } => Self {
                tau: Some(tau),
                norm: Some(norm),
                ..Self::new(RuleKind::SafeDaggerStar)
            },
            DecisionRule::DropoutDagger { tau, p, n, norm } => Self {
                tau: Some(tau),
                p: Some(p),
                samples: Some(n),
                norm: Some(norm),
                ..Self::new(RuleKind::DropoutDagger)
            },
        };
        spec.label = Some(rule.name().to_string());
        spec
    }

    fn unused(&self) -> Vec<&'static str> {
        let mut present = Vec::new();
        let allowed: &[&str] = match self.rule {
            RuleKind::BehaviorCloning | RuleKind::ExpertLabelsOnly => &[],
            RuleKind::VanillaDagger => &["beta0", "lambda"],
            RuleKind::SafeDaggerStar => &["tau", "norm"],
            RuleKind::DropoutDagger => &["tau", "p", "samples", "norm"],
        };
        for (name, set) in [
            ("tau", self.tau.is_some()),
            ("p", self.p.is_some()),
            ("samples", self.samples.is_some()),
            ("norm", self.norm.is_some()),
            ("beta0", self.beta0.is_some()),
            ("lambda", self.lambda.is_some()),
        ] {
            if set && !allowed.contains(&name) {
                present.push(name);
            }
        }
        present
    }

    pub fn to_rule(&self) -> Result<DecisionRule, ExperimentError> {
        if let Some(name) = self.unused().first() {
            return Err(ExperimentError::Invalid {
                field: format!("algorithm.{name}"),
                message: format!("not a parameter of {:?}", self.rule),
            });
        }
        let norm = self.norm.unwrap_or_default();
        let rule = match self.rule {
            RuleKind::BehaviorCloning => DecisionRule::BehaviorCloning,
            RuleKind::ExpertLabelsOnly => DecisionRule::ExpertLabelsOnly,
            RuleKind::VanillaDagger => DecisionRule::VanillaDagger {
                beta0: self.beta0.unwrap_or(VANILLA_BETA0),
                lambda: self.lambda.unwrap_or(VANILLA_LAMBDA),
            },
            RuleKind::SafeDaggerStar => DecisionRule::SafeDaggerStar {
                tau: self.tau.unwrap_or(SAFEDAGGER_TAU),
                norm,
            },
            RuleKind::DropoutDagger => DecisionRule::DropoutDagger {
                tau: self.tau.unwrap_or(DROPOUT_TAU),
                p: self.p.unwrap_or(DROPOUT_P),
                n: self.samples.unwrap_or(DEFAULT_SAMPLES),
                norm,
            },
        };
        rule.validate().map_err(|e| ExperimentError::Invalid {
            field: "algorithm".into(),
            message: e.to_string(),
        })?;
        Ok(rule)
    }

    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self.to_rule().map(|r| r.name().to_string()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub environment: EnvironmentKind,
    /// Standard deviation of Gaussian noise added to the novice's
    /// observations on top of the environment's own.
    pub observation_noise: f64,
    /// Used when neither the command line nor the environment sets one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Dump the first collection episode of every epoch.
    pub trajectories: bool,
    pub dagger: DaggerConfig,
    pub dubins: DubinsRoomConfig,
    pub point_mass: PointMassConfig,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            environment: EnvironmentKind::Dubins,
            observation_noise: 0.0,
            output_dir: None,
            trajectories: true,
            dagger: DaggerConfig::default(),
            dubins: DubinsRoomConfig::default(),
            point_mass: PointMassConfig::default(),
            algorithms: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// The five-algorithm roster with default parameters.
    pub fn standard_roster() -> Vec<AlgorithmSpec> {
        [
            RuleKind::DropoutDagger,
            RuleKind::VanillaDagger,
            RuleKind::SafeDaggerStar,
            RuleKind::BehaviorCloning,
            RuleKind::ExpertLabelsOnly,
        ]
        .into_iter()
        .map(|k| {
            let rule = AlgorithmSpec::new(k).to_rule().expect("defaults are valid");
            AlgorithmSpec::from_rule(&rule)
        })
        .collect()
    }

    /// Parses and validates; algorithm entries come back with every default
    /// filled in, so `to_toml` of the result parses to the same value.
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let mut config: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        config.resolve()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn resolve(&mut self) -> Result<(), ExperimentError> {
        self.validate()?;
        for spec in &mut self.algorithms {
            let label = spec.label();
            let rule = spec.to_rule()?;
            *spec = AlgorithmSpec::from_rule(&rule);
            spec.label = Some(label);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |field: &str, message: String| ExperimentError::Invalid {
            field: field.into(),
            message,
        };
        if self.algorithms.is_empty() {
            return Err(invalid("algorithm", "at least one [[algorithm]] entry is required".into()));
        }
        let mut labels = HashSet::new();
        for spec in &self.algorithms {
            spec.to_rule()?;
            let label = spec.label();
            if label.is_empty() || label.contains([',', '\n', '"']) {
                return Err(invalid("algorithm.label", format!("unusable label {label:?}")));
            }
            if !labels.insert(label.clone()) {
                return Err(invalid("algorithm.label", format!("duplicate label {label:?}")));
            }
        }
        self.dagger
            .validate()
            .map_err(|e| invalid("dagger", e.to_string()))?;
        match self.environment {
            EnvironmentKind::Dubins => self.dubins.validate(),
            EnvironmentKind::PointMass => self.point_mass.validate(),
        }
        .map_err(|e| invalid("environment", e.to_string()))?;
        if !(self.observation_noise >= 0.0 && self.observation_noise.is_finite()) {
            return Err(invalid("observation_noise", "must be non-negative".into()));
        }
        Ok(())
    }

    pub fn rules(&self) -> Result<Vec<(String, DecisionRule)>, ExperimentError> {
        self.algorithms
            .iter()
            .map(|s| Ok((s.label(), s.to_rule()?)))
            .collect()
    }
}
