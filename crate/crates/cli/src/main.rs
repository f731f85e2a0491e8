//! `affekt` — EEG affect-recognition pipeline driver.
//!
//! Exit codes: 0 success, 1 at least one grid cell failed, 2 usage or
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use affekt::signal::{write_dataset, ChannelId};
use affekt_cli::{config::PipelineConfig, convert, pipeline, recipe::SynthRecipe};

#[derive(Parser)]
#[command(name = "affekt", version, about = "EEG affect-recognition pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a CSV trial directory into the canonical dataset format.
    Convert(ConvertArgs),
    /// Generate a seeded synthetic dataset from a class recipe.
    Synth(SynthArgs),
    /// Run the full experiment grid described by a config file.
    Run(RunArgs),
    /// Re-tabulate an output directory from its existing cell results.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Directory holding ratings.csv plus per-trial CSV files.
    #[arg(long)]
    input: PathBuf,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    /// Channel names matching the CSV row order, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ChannelId::SELECTED.map(|c| c.to_string()))]
    channels: Vec<String>,
    /// Sample rate of the input data in Hz.
    #[arg(long, default_value_t = 128.0)]
    sample_rate: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// Built-in recipe name (`alpha-vs-beta`).
    #[arg(long, default_value = "alpha-vs-beta", conflicts_with = "recipe_file")]
    recipe: String,
    /// TOML recipe file overriding the built-in recipes.
    #[arg(long)]
    recipe_file: Option<PathBuf>,
    /// Number of trials to generate.
    #[arg(long)]
    trials: u32,
    /// Master seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Signal-to-noise ratio per trial in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Trial duration in seconds.
    #[arg(long)]
    duration_s: Option<f64>,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of a previous run.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Convert(args) => cmd_convert(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Run(args) => cmd_run(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn cmd_convert(args: ConvertArgs) -> ExitCode {
    let channels: Vec<ChannelId> = match args.channels.iter().map(|s| s.parse()).collect() {
        Ok(channels) => channels,
        Err(e) => return usage_error(e),
    };
    match convert::convert(&args.input, &args.out, &channels, args.sample_rate) {
        Ok((trials, n_channels, n_samples)) => {
            println!(
                "converted {trials} trials ({n_channels} channels x {n_samples} samples) to {}",
                args.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(e),
    }
}

fn cmd_synth(args: SynthArgs) -> ExitCode {
    let mut recipe = match &args.recipe_file {
        Some(path) => match SynthRecipe::from_file(path) {
            Ok(recipe) => recipe,
            Err(e) => return usage_error(e),
        },
        None => match SynthRecipe::builtin(&args.recipe) {
            Ok(recipe) => recipe,
            Err(e) => return usage_error(e),
        },
    };
    if let Some(snr) = args.snr_db {
        recipe.snr_db = snr;
    }
    if let Some(duration) = args.duration_s {
        recipe.duration_s = duration;
    }

    let dataset = match recipe.generate(args.trials, args.seed) {
        Ok(dataset) => dataset,
        Err(e) => return usage_error(e),
    };
    if let Err(e) = write_dataset(&dataset, &args.out) {
        return usage_error(e);
    }
    println!(
        "wrote {} trials of recipe `{}` (seed {}) to {}",
        dataset.len(),
        recipe.name,
        args.seed,
        args.out.display()
    );
    ExitCode::SUCCESS
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let mut config = match PipelineConfig::from_file(&args.config) {
        Ok(config) => config,
        Err(e) => return usage_error(e),
    };
    if let Some(seed) = args.seed {
        config.pipeline.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        config.pipeline.jobs = jobs;
    }
    if let Some(out) = args.out {
        config.output.dir = out;
    }

    match pipeline::run(&config) {
        Ok(outcome) => {
            for (classifier, table) in &outcome.report.tables {
                println!("classifier: {classifier}");
                print!("{}", table.to_text());
            }
            println!(
                "{} cells evaluated, {} failed; report at {}",
                outcome.report.cells.len(),
                outcome.failed_cells,
                config.output.dir.join("report.json").display()
            );
            if outcome.failed_cells > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => usage_error(e),
    }
}

fn cmd_report(args: ReportArgs) -> ExitCode {
    match pipeline::retabulate(&args.out) {
        Ok(outcome) => {
            for (classifier, table) in &outcome.report.tables {
                println!("classifier: {classifier}");
                print!("{}", table.to_text());
            }
            if outcome.failed_cells > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => usage_error(e),
    }
}
