use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use simkit::output::{emit_csv, emit_metadata, emit_svg};
use simkit::{Experiment, RunError, SystemConfig};

#[derive(Parser)]
#[command(
    name = "simkit",
    version,
    about = "IRS-aided OFDM Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized channel-estimation MSE versus transmit power.
    Mse(RunArgs),
    /// Achievable rate versus user-AP horizontal distance.
    RateDistance(RunArgs),
    /// Effective rate versus IRS grouping ratio.
    RateGrouping(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Also write an SVG chart.
    #[arg(long)]
    svg: bool,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(args: &RunArgs) -> Result<SystemConfig, Failure> {
    let mut cfg = SystemConfig::load(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))
        .map_err(Failure::Config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.realizations {
        cfg.realizations = r;
    }
    cfg.validate()
        .context("validating command-line overrides")
        .map_err(Failure::Config)?;
    Ok(cfg)
}

fn write_outputs(
    experiment: Experiment,
    cfg: &SystemConfig,
    output: &simkit::ExperimentOutput,
    dir: &Path,
    svg: bool,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let base = dir.join(experiment.id());
    let csv = base.with_extension("csv");
    emit_csv(&output.rows, &csv).with_context(|| format!("writing {}", csv.display()))?;
    let meta = base.with_extension("meta");
    emit_metadata(output, cfg, &meta).with_context(|| format!("writing {}", meta.display()))?;
    if svg {
        let path = base.with_extension("svg");
        emit_svg(experiment, &output.rows, &path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {} rows to {}", output.rows.len(), csv.display());
    Ok(())
}

fn run(experiment: Experiment, args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let output = experiment.run(&cfg).map_err(|e| match e {
        RunError::Config(c) => Failure::Config(anyhow::Error::new(c).context("invalid sweep")),
        RunError::Core(c) => {
            Failure::Runtime(anyhow::Error::new(c).context(format!("running {}", experiment.id())))
        }
    })?;
    write_outputs(experiment, &cfg, &output, &args.out, args.svg).map_err(Failure::Runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Mse(a) => (Experiment::MseVsPower, a),
        Command::RateDistance(a) => (Experiment::RateVsDistance, a),
        Command::RateGrouping(a) => (Experiment::RateVsGrouping, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
