use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vadesc_cli::commands;
use vadesc_cli::{Checkpoint, CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "vadesc", version, about = "Variational deep survival clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Model file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct WithPredictions {
    #[command(flatten)]
    common: Common,
    /// Predictions CSV written by `predict`.
    #[arg(long)]
    predictions: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset and split it into train and test files.
    Simulate(Common),
    /// Fit a model and write a checkpoint plus an ELBO trace.
    Train(Common),
    /// Cluster labels, posteriors, median times and latents for a dataset.
    Predict(Common),
    /// Survival and clustering metrics of a predictions file.
    Evaluate(WithPredictions),
    /// Per-cluster Kaplan-Meier curves.
    KmExport(WithPredictions),
}

fn run_config(common: &Common) -> CliResult<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse("")?,
    };
    if let Some(seed) = common.seed {
        config.train.seed = seed;
    }
    Ok(config)
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CliError::new("usage", format!("--{flag} is required")))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(common) => {
            let config = run_config(&common)?;
            let out = common.out.clone().unwrap_or_else(|| config.out_dir.clone());
            let files = commands::simulate(&config, &out)?;
            log::info!("wrote {}, {} and {}", files.train.display(), files.test.display(), files.manifest.display());
        }
        Command::Train(common) => {
            let config = run_config(&common)?;
            let data = common
                .data
                .as_deref()
                .or(config.train_path.as_deref())
                .ok_or_else(|| CliError::new("usage", "--data or train_path is required"))?;
            let out = common
                .out
                .as_deref()
                .or(common.checkpoint.as_deref())
                .ok_or_else(|| CliError::new("usage", "--out is required"))?;
            commands::train(&config, data, out)?;
            log::info!("wrote {} and {}", out.display(), commands::trace_path(out).display());
        }
        Command::Predict(common) => {
            let ckpt = Checkpoint::load(required(&common.checkpoint, "checkpoint")?)?;
            let data = common
                .data
                .as_deref()
                .or(ckpt.config.test_path.as_deref())
                .ok_or_else(|| CliError::new("usage", "--data or test_path is required"))?;
            commands::predict(&ckpt, data, required(&common.out, "out")?)?;
        }
        Command::Evaluate(args) => {
            let text = commands::evaluate(&args.predictions, required(&args.common.data, "data")?)?;
            commands::emit(&text, args.common.out.as_deref())?;
        }
        Command::KmExport(args) => {
            let text = commands::km_export(&args.predictions, required(&args.common.data, "data")?)?;
            commands::emit(&text, args.common.out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::new("usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
