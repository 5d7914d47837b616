//! `rippler`: simulate epidemic datasets, sample their latent states and
//! measure the samplers.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use rippler_core::chain::KernelKind;
use rippler_core::config::PRESET_NAMES;

#[derive(Debug, Parser)]
#[command(name = "rippler", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a latent epidemic and its observations (X.csv, Y.csv).
    Simulate(CommonArgs),
    /// Sample the latent epidemic given observations.
    Infer(InferArgs),
    /// Time the kernels over a sweep of model sizes.
    Benchmark(BenchmarkArgs),
    /// Compare every kernel with the exact posterior of a tiny model.
    Oracle(OracleArgs),
}

/// Where the run configuration comes from and where results go.
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    config: Option<PathBuf>,
    /// Built-in study configuration.
    #[arg(long, value_name = "NAME", value_parser = PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn kernel_names() -> Vec<&'static str> {
    KernelKind::ALL.iter().map(|k| k.name()).collect()
}

#[derive(Debug, Args)]
struct InferArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Directory holding Y.csv and, optionally, the true X.csv. Without it
    /// the dataset is simulated from the configuration.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Latent kernel, overriding the configuration.
    #[arg(long, value_parser = PossibleValuesParser::new(kernel_names()))]
    kernel: Option<String>,
    /// Number of iterations K.
    #[arg(long)]
    iterations: Option<usize>,
    /// Latent updates per iteration K'.
    #[arg(long)]
    updates: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Iterations per kernel and size.
    #[arg(long)]
    iterations: Option<usize>,
    /// Latent updates per iteration.
    #[arg(long)]
    updates: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Directory holding Y.csv; simulated from the configuration otherwise.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Latent updates per kernel.
    #[arg(long)]
    updates: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Infer(args) => commands::infer(&args),
        Command::Benchmark(args) => commands::benchmark(&args),
        Command::Oracle(args) => commands::oracle(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
