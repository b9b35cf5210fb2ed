//! Seeded multi-algorithm sweeps and their output files.
//!
//! A run writes into one directory:
//!
//! - `config.toml`: the resolved configuration
//! - `results.csv`, `results.json`: one row per algorithm and epoch
//! - `diagnostics.csv`: every collection step with the rule's numbers
//! - `results.svg`: safety and learning curves
//! - `trajectories/<label>_epochNN.csv`: first collection episode per epoch

mod config;
mod results;
mod svg;
mod trajectory;

pub use config::{
    AlgorithmSpec, EnvironmentKind, ExperimentConfig, RuleKind, DROPOUT_P, DROPOUT_TAU, SAFEDAGGER_TAU,
    VANILLA_BETA0, VANILLA_LAMBDA,
};
pub use results::{ResultRow, ResultsTable, RESULTS_HEADER};
pub use svg::{fit_range, panel_axes, render_results_svg, render_trajectory_svg, AxisMap};
pub use trajectory::{parse_trajectory_csv, trajectory_rows, trajectory_to_csv, TrajectoryRow, TRAJECTORY_HEADER};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::dagger::{run_dagger_with, seed, DaggerConfig, DaggerError, EpochMetrics, Rollout};
use crate::env::{
    DubinsEnv, DubinsExpert, Environment, GaussianObsNoise, PointMassEnv, PointMassExpert,
};
use crate::policy::ExpertPolicy;
use crate::rules::DecisionRule;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "DAGGER_LAB_OUT_DIR";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("nothing to render")]
    EmptyTable,
    #[error(transparent)]
    Dagger(#[from] DaggerError),
}

/// Outcome of one algorithm within a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmStatus {
    pub label: String,
    pub seed: u64,
    pub completed_epochs: usize,
    /// Set when the run stopped early; its finished epochs are still in the
    /// table.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub table: ResultsTable,
    pub statuses: Vec<AlgorithmStatus>,
    pub metrics: Vec<(String, Vec<EpochMetrics>)>,
}

impl ExperimentReport {
    pub fn is_partial(&self) -> bool {
        self.statuses.iter().any(|s| s.error.is_some())
    }
}

/// Output directory precedence: explicit argument, then the config's
/// `output_dir`, then `dagger-out`.
pub fn resolve_output_dir(explicit: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("dagger-out"))
}

fn write(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    fs::write(path, contents).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

const DIAGNOSTICS_HEADER: &str = "algorithm,epoch,episode,t,actor,expert_u,executed_u,p_hat,distance,beta,reward";

/// Per-algorithm output gathered during a run.
#[derive(Default)]
struct Collected {
    diagnostics: String,
    trajectories: Vec<(String, String)>,
}

fn join_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn collect_epoch<S>(out: &mut Collected, label: &str, epoch: u32, rollouts: &[Rollout<S>], dt: f64, dump: bool) {
    for (k, r) in rollouts.iter().enumerate() {
        for s in &r.steps {
            writeln!(
                out.diagnostics,
                "{label},{epoch},{k},{},{},{},{},{},{},{},{:.16e}",
                s.t,
                s.actor.as_str(),
                s.expert_action.as_ref().map(|a| join_values(a.values())).unwrap_or_default(),
                join_values(s.executed.values()),
                opt(s.diagnostics.p_hat),
                opt(s.diagnostics.distance),
                opt(s.diagnostics.beta),
                s.reward,
            )
            .unwrap();
        }
    }
    if dump {
        if let Some(first) = rollouts.first() {
            let file = format!("{}_epoch{epoch:02}.csv", slug(label));
            out.trajectories.push((file, trajectory_to_csv(&trajectory_rows(first, dt))));
        }
    }
}

/// File-name-safe form of an algorithm label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '-' | '_' | '.' => c,
            '*' => 'x',
            _ => '_',
        })
        .collect()
}

fn run_one<E, X>(
    config: &DaggerConfig,
    label: &str,
    rule: &DecisionRule,
    env: &mut E,
    expert: &X,
    dt: f64,
    dump: bool,
) -> (Vec<EpochMetrics>, Option<String>, Collected)
where
    E: Environment,
    X: ExpertPolicy<E::State>,
{
    let mut collected = Collected::default();
    let mut seen = Vec::new();
    let result = run_dagger_with(config, rule, env, expert, |report| {
        if let (Some(epoch), Some(m)) = (report.epoch, report.metrics) {
            collect_epoch(&mut collected, label, epoch, report.rollouts, dt, dump);
            seen.push(m.clone());
        }
    });
    match result {
        Ok(run) => (run.metrics, None, collected),
        Err(DaggerError::Diverged { completed, loss }) => {
            (completed, Some(format!("training diverged (loss {loss:e})")), collected)
        }
        Err(e) => (seen, Some(e.to_string()), collected),
    }
}

/// Runs every algorithm in `config` and writes all outputs to `out_dir`.
/// An algorithm that fails keeps its finished epochs and is marked in the
/// report; the others still run.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let rules = config.rules()?;
    create_dir(out_dir)?;
    write(&out_dir.join("config.toml"), &config.to_toml())?;

    let mut table = ResultsTable::default();
    let mut statuses = Vec::new();
    let mut all_metrics = Vec::new();
    let mut diagnostics = String::from(DIAGNOSTICS_HEADER);
    diagnostics.push('\n');
    let mut trajectories = Vec::new();

    for (index, (label, rule)) in rules.iter().enumerate() {
        let algo_seed = seed::derive(config.dagger.seed, seed::Stream::Algorithm, 0, index as u64);
        let dagger = DaggerConfig {
            seed: algo_seed,
            ..config.dagger.clone()
        };
        let (metrics, error, collected) = match config.environment {
            EnvironmentKind::Dubins => {
                let expert = DubinsExpert::new(&config.dubins);
                let dt = config.dubins.dt;
                let env = DubinsEnv::new(config.dubins.clone()).map_err(DaggerError::from)?;
                let mut env = GaussianObsNoise::new(env, config.observation_noise).map_err(DaggerError::from)?;
                run_one(&dagger, label, rule, &mut env, &expert, dt, config.trajectories)
            }
            EnvironmentKind::PointMass => {
                let expert = PointMassExpert {
                    gain: config.point_mass.gain,
                };
                let dt = config.point_mass.dt;
                let env = PointMassEnv::new(config.point_mass.clone()).map_err(DaggerError::from)?;
                let mut env = GaussianObsNoise::new(env, config.observation_noise).map_err(DaggerError::from)?;
                run_one(&dagger, label, rule, &mut env, &expert, dt, config.trajectories)
            }
        };
        table
            .rows
            .extend(metrics.iter().map(|m| ResultRow::from_metrics(label, m)));
        statuses.push(AlgorithmStatus {
            label: label.clone(),
            seed: algo_seed,
            completed_epochs: metrics.len(),
            error,
        });
        all_metrics.push((label.clone(), metrics));
        diagnostics.push_str(&collected.diagnostics);
        trajectories.extend(collected.trajectories);
    }

    let report = ExperimentReport {
        name: config.name.clone(),
        table,
        statuses,
        metrics: all_metrics,
    };
    write(&out_dir.join("results.csv"), &report.table.to_csv())?;
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    write(&out_dir.join("results.json"), &json)?;
    write(&out_dir.join("diagnostics.csv"), &diagnostics)?;
    if !trajectories.is_empty() {
        let dir = out_dir.join("trajectories");
        create_dir(&dir)?;
        for (file, csv) in &trajectories {
            write(&dir.join(file), csv)?;
        }
    }
    if !report.table.is_empty() {
        render_plots(&report.table, &config.name, out_dir)?;
    }
    Ok(report)
}

/// Writes `results.svg` into `out_dir` and returns its path.
pub fn render_plots(table: &ResultsTable, title: &str, out_dir: &Path) -> Result<PathBuf, ExperimentError> {
    let svg = render_results_svg(table, title)?;
    create_dir(out_dir)?;
    let path = out_dir.join("results.svg");
    write(&path, &svg)?;
    Ok(path)
}
