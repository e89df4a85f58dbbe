//! `weakpde`: simulate Kuramoto-Sivashinsky data, identify PDE models from
//! gridded fields and run parameter sweeps.

mod commands;
mod error;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "weakpde", version, about = "Weak-form sparse regression for PDE identification")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the Kuramoto-Sivashinsky equation and save the field.
    Simulate(SimulateArgs),
    /// Identify a PDE from one or more noisy realisations of the data.
    Identify(IdentifyArgs),
    /// Run one ensemble per value of a single parameter and write a CSV table.
    Sweep(SweepArgs),
    /// Fourier spectrum of the data along one axis, optionally windowed.
    Spectrum(SpectrumArgs),
    /// Print the effective configuration as TOML.
    Config(ConfigArgs),
}

/// Config file plus the overrides shared by identify, sweep and spectrum.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML config file, or a run manifest to replay.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Field file to use instead of the configured data source.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Spatial stride applied to the loaded field [default: 4].
    #[arg(long)]
    pub stride_x: Option<usize>,
    /// Temporal stride applied to the loaded field [default: 4].
    #[arg(long)]
    pub stride_t: Option<usize>,
    /// Noise level in units of the field's standard deviation [default: 0.03].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Sparsification threshold [default: 1.4].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Master seed for noise and domain placement [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Integration domains [default: 50].
    #[arg(long)]
    pub domains: Option<usize>,
    /// Domain width in space [default: 14.73].
    #[arg(long)]
    pub width_x: Option<f64>,
    /// Domain width in time [default: 75].
    #[arg(long)]
    pub width_t: Option<f64>,
    /// Envelope powers alpha = beta [default: 8].
    #[arg(long)]
    pub alpha_beta: Option<u32>,
    /// Spatial weight frequency l [default: 1].
    #[arg(long)]
    pub l: Option<u32>,
    /// Temporal weight frequency m [default: 2].
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// TOML config file (its [data.simulation] table), or a run manifest.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output field file.
    #[arg(long, short)]
    out: PathBuf,
    /// Seed of the random initial condition.
    #[arg(long)]
    seed: Option<u64>,
    /// Recorded time span.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    #[command(flatten)]
    common: Common,
    /// Number of independent trials [default: 1].
    #[arg(long)]
    trials: Option<usize>,
    /// Machine-readable result (JSON).
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter to vary: sigma, gamma, resolution, K, F_x, F_t, L_x, L_t, l, m, alpha_beta.
    #[arg(long)]
    axis: String,
    /// Comma-separated values, or `start:stop:count` for evenly spaced ones.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// Trials per value [default: from config, 100].
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum AxisArg {
    Space,
    Time,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "space")]
    axis: AxisArg,
    /// Average the spectra of enveloped data over this many random domains
    /// instead of transforming the whole field.
    #[arg(long)]
    windowed: Option<usize>,
    /// Output CSV of (frequency, power).
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[command(flatten)]
    common: Common,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(a.config.as_deref(), &a.out, a.seed, a.duration),
        Command::Identify(a) => commands::identify(&a.common, a.trials, &a.out),
        Command::Sweep(a) => commands::sweep(&a.common, &a.axis, &a.values, a.trials, &a.out),
        Command::Spectrum(a) => {
            let axis = match a.axis {
                AxisArg::Space => weakpde::Axis::Space,
                AxisArg::Time => weakpde::Axis::Time,
            };
            commands::spectrum(&a.common, axis, a.windowed, &a.out)
        }
        Command::Config(a) => commands::print_config(&a.common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakpde: {e}");
            e.exit_code()
        }
    }
}
