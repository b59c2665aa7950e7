use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Autoencoding learning classifier system.
#[derive(Debug, Parser)]
#[command(name = "ycsae", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train rulebases and write metrics CSVs and model files.
    Train(TrainArgs),
    /// Write a noisy all-zeros/all-ones dataset file.
    GenData(GenDataArgs),
    /// Print hidden-layer encodings of inputs under a trained model.
    Encode(EncodeArgs),
    /// Summarise a model file.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OffspringInitArg {
    Inherit,
    Reset,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Pattern length l [default: 11, or the dataset's length]
    #[arg(long)]
    length: Option<usize>,
    /// Hidden nodes H
    #[arg(long, default_value_t = 5)]
    hidden: usize,
    /// Rulebase size N
    #[arg(long, default_value_t = 1000)]
    pop_size: usize,
    /// Learning rate β
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Fitness exponent
    #[arg(long, default_value_t = 50.0)]
    v: f64,
    /// EA period threshold θ_GA
    #[arg(long, default_value_t = 25.0)]
    theta_ga: f64,
    /// Per-gene mutation probability μ
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
    /// Mutation step bound m0
    #[arg(long, default_value_t = 0.1)]
    m0: f64,
    /// Initial error estimate ε0 [default: length/2]
    #[arg(long)]
    eps0: Option<f64>,
    /// Initial niche-size estimate σ0 [default: pop-size/2]
    #[arg(long)]
    sigma0: Option<f64>,
    /// Half-range of uniform weight initialisation
    #[arg(long, default_value_t = 1.0)]
    w0: f64,
    /// Bit-flip probability of generated inputs [default: 0.1]
    #[arg(long, conflicts_with = "dataset")]
    noise: Option<f64>,
    /// System cycles per run
    #[arg(long, default_value_t = 50_000)]
    cycles: u64,
    /// Cycles between metric rows
    #[arg(long, default_value_t = 500)]
    sample_interval: u64,
    /// Independent runs
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Master seed; run i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train on patterns from a dataset file instead of generated data
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "ycsae-out")]
    out_dir: PathBuf,
    /// Offspring estimates: copied from the parent or reset to ε0/σ0
    #[arg(long, value_enum, default_value_t = OffspringInitArg::Inherit)]
    offspring_init: OffspringInitArg,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 11)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    /// A single pattern, e.g. 00100000000
    #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
    input: Option<String>,
    /// A dataset file of patterns
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::GenData(args) => commands::gen_data(args),
        Command::Encode(args) => commands::encode(args),
        Command::Inspect(args) => commands::inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
