use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zakharov_cli::config::Config;
use zakharov_cli::{
    resolve_out_dir, run_conserve, run_estimates, run_from_manifest, run_highlow_scan,
    run_simulate, CliError, CommonOpts,
};

/// Simulation laboratory for the one-dimensional periodic Zakharov system.
#[derive(Parser)]
#[command(name = "zakharov", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (falls back to $ZAKHAROV_OUT, then ./zakharov-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configured state and record the diagnostics time series.
    Simulate,
    /// Run the conservation audit over a dt ladder.
    Conserve,
    /// Run the smoothing-exponent scan and the high-low iteration driver.
    HighlowScan,
    /// Run the resonance, counting, and bilinear estimate sweeps.
    Estimates,
    /// Replay an experiment from an existing manifest.
    Rerun {
        /// Path to a manifest.json from a previous run.
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        // Ignore failure when a pool already exists (e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    let opts = CommonOpts {
        out_dir: resolve_out_dir(cli.out),
        seed_override: cli.seed,
        quiet: cli.quiet,
    };
    if let Command::Rerun { manifest } = &cli.command {
        return run_from_manifest(manifest, &opts);
    }
    let config_path = cli
        .config
        .ok_or_else(|| CliError::usage("--config is required".into()))?;
    let config = Config::load(&config_path)?;
    match cli.command {
        Command::Simulate => run_simulate(&config, &opts).map(|_| ()),
        Command::Conserve => run_conserve(&config, &opts).map(|_| ()),
        Command::HighlowScan => run_highlow_scan(&config, &opts).map(|_| ()),
        Command::Estimates => run_estimates(&config, &opts).map(|_| ()),
        Command::Rerun { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code.clamp(0, 255) as u8)
        }
    }
}
