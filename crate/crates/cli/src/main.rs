use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::Status;
use config::ExperimentConfig;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "kitinet", version, about = "Collision-operator experiments: kernel checks, DSMC, condensation training, sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Operator invariant suite: reduction, momentum, matching energy, gradients.
    KernelCheck,
    /// Hard-sphere DSMC run with time-series and speed histogram output.
    Dsmc,
    /// Sine-regression training with condensation snapshots.
    Train,
    /// Training over an n_divide x coll_coef x seed grid.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match prepare(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let out = cfg.output_dir.clone();
    let result = match cli.command {
        Command::KernelCheck => commands::kernel_check(&cfg, &out),
        Command::Dsmc => commands::dsmc(&cfg, &out),
        Command::Train => commands::train_cmd(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failure) => ExitCode::from(EXIT_FAILURE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

/// Loads, overrides and validates the config before anything is written.
fn prepare(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    match cli.command {
        Command::KernelCheck => cfg.validate_kernel()?,
        Command::Dsmc => cfg.validate_dsmc()?,
        Command::Train => cfg.validate_train()?,
        Command::Sweep => cfg.validate_sweep()?,
    }
    Ok(cfg)
}
