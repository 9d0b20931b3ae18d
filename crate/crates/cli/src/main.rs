//! `repchain`: simulate repeater chains over fiber paths, evaluate metrics,
//! enumerate placements, search minimal mode counts and optimize hardware.

// `!(x > 0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ParamsSpec, PlacementSpec, Seconds, UsageError};

#[derive(Debug, Parser)]
#[command(name = "repchain", version, about = "Quantum repeater chain simulator and hardware optimizer")]
struct Cli {
    /// Flat `key = value` file mirroring the long flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one chain simulation and write the raw pair records.
    Simulate(SimulateArgs),
    /// Compute SKR or BQC figures from a record dump.
    Metrics(MetricsArgs),
    /// List every repeater placement on a fiber path.
    Enumerate(EnumerateArgs),
    /// Smallest mode count reaching a target rate on a noiseless symmetric chain.
    MinModes(MinModesArgs),
    /// Search for the cheapest hardware that meets a target rate.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Fiber path CSV (`a,b,length_km[,attenuation_db]`); defaults to the bundled grid.
    #[arg(long)]
    pub path_file: Option<PathBuf>,
    /// `r:a`, `sites:i,j,k` or `direct`.
    #[arg(long)]
    pub placement: Option<PlacementSpec>,
    /// `T,n,F,pdet,sq` or `baseline`.
    #[arg(long)]
    pub params: Option<ParamsSpec>,
    /// Repeater cut-off in seconds, or `inf`.
    #[arg(long)]
    pub cutoff: Option<Seconds>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of end-to-end pairs to deliver.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Record dump destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary destination; stdout when the dump goes to a file, stderr otherwise.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Record dump written by `simulate`.
    pub dump: Option<PathBuf>,
    /// `skr` or `bqc`.
    #[arg(long)]
    pub metric: Option<repchain::metrics::Metric>,
    /// Memory coherence time for BQC; read from the dump header when absent.
    #[arg(long)]
    pub coherence_time: Option<Seconds>,
    /// Append one row to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub path_file: Option<PathBuf>,
    #[arg(long)]
    pub max_repeaters: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinModesArgs {
    /// Total fiber length in km; with `--attenuation`, replaces the path file.
    #[arg(long)]
    pub length: Option<f64>,
    /// Total attenuation in dB.
    #[arg(long)]
    pub attenuation: Option<f64>,
    #[arg(long)]
    pub path_file: Option<PathBuf>,
    #[arg(long)]
    pub repeaters: Option<usize>,
    /// Target rate in Hz.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub metric: Option<repchain::metrics::Metric>,
    /// Simulations per probed mode count.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Pairs per simulation.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// One-sided confidence margin in standard errors.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub modes_cap: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub path_file: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub metric: Option<repchain::metrics::Metric>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for `result.txt`, `history.csv` and `radar.csv`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => config::ConfigFile::load(path)?,
        None => config::ConfigFile::default(),
    };
    match cli.command {
        Command::Simulate(args) => commands::simulate(args, file),
        Command::Metrics(args) => commands::metrics(args, file),
        Command::Enumerate(args) => commands::enumerate(args, file),
        Command::MinModes(args) => commands::min_modes(args, file),
        Command::Optimize(args) => commands::optimize(args, file),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
