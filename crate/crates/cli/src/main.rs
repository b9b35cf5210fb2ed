use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use dagger_core::env::DubinsRoomConfig;
use dagger_core::experiment::{
    parse_trajectory_csv, render_plots, render_trajectory_svg, resolve_output_dir, run_experiment, ExperimentConfig,
    ResultsTable, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "dagger-lab", version, about = "Safe imitation learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm in a config and write results, plots, and dumps.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long, short, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
        /// Master seed; overrides `dagger.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render safety/learning curves from a results CSV.
    Plot {
        results: PathBuf,
        /// SVG path; defaults to `results.svg` next to the CSV.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        title: String,
    },
    /// Draw a trajectory CSV inside the room.
    Replay {
        trajectory: PathBuf,
        /// SVG path; defaults to the CSV path with an `.svg` extension.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Take the room geometry from this experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse and validate a config, then print it with defaults filled in.
    Validate { config: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<ExitCode> {
    let mut config = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        config.dagger.seed = seed;
    }
    let out_dir = resolve_output_dir(out.as_deref(), &config);
    let report = run_experiment(&config, &out_dir)?;

    println!("{:<20} {:>5} {:>9} {:>9} {:>9}", "algorithm", "epoch", "safety", "learning", "expert");
    for r in &report.table.rows {
        println!(
            "{:<20} {:>5} {:>9.3} {:>9.3} {:>9.3}",
            r.algorithm, r.epoch, r.safety_mean, r.learning_mean, r.expert_action_fraction
        );
    }
    println!("wrote {}", out_dir.display());
    let mut code = ExitCode::SUCCESS;
    for s in report.statuses.iter().filter(|s| s.error.is_some()) {
        eprintln!(
            "warning: {} stopped after {} epochs: {}",
            s.label,
            s.completed_epochs,
            s.error.as_deref().unwrap_or_default()
        );
        code = ExitCode::from(2);
    }
    Ok(code)
}

fn plot(results: &Path, out: Option<PathBuf>, title: &str) -> Result<()> {
    let table = ResultsTable::parse_csv(&read(results)?)?;
    if table.is_empty() {
        bail!("{} has no rows", results.display());
    }
    let written = match out {
        Some(path) => {
            let svg = dagger_core::experiment::render_results_svg(&table, title)?;
            std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            path
        }
        None => render_plots(&table, title, results.parent().unwrap_or(Path::new(".")))?,
    };
    println!("wrote {}", written.display());
    Ok(())
}

fn replay(trajectory: &Path, out: Option<PathBuf>, config: Option<PathBuf>) -> Result<()> {
    let rows = parse_trajectory_csv(&read(trajectory)?)?;
    let room = match config {
        Some(path) => ExperimentConfig::load(&path)?.dubins.room(),
        None => DubinsRoomConfig::default().room(),
    };
    let svg = render_trajectory_svg(&room, &rows)?;
    let path = out.unwrap_or_else(|| trajectory.with_extension("svg"));
    std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, out, seed } => run(&config, out, seed),
        Command::Plot { results, out, title } => plot(&results, out, &title).map(|_| ExitCode::SUCCESS),
        Command::Replay { trajectory, out, config } => replay(&trajectory, out, config).map(|_| ExitCode::SUCCESS),
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            print!("{}", config.to_toml());
            Ok(ExitCode::SUCCESS)
        }
    }
}
