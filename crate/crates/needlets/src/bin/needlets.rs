//! Batch command-line front end: parses flags and an optional JSON
//! configuration, runs one experiment, and writes its tables, figures, and
//! manifest into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-feasibility
//! error, 4 internal invariant violation.

use clap::{Args, Parser, Subcommand};
use needlets::report::config::{
    CorrelationConfig, GofFileConfig, LocalizationConfig, RegimesConfig, ScalesConfig,
    WindowsConfig,
};
use needlets::report::runners::{
    cmd_correlation, cmd_gof, cmd_localization, cmd_regimes, cmd_scales, cmd_windows,
};
use needlets::report::{write_outputs, RunError, RunOutput};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "needlets",
    version,
    about = "Flexible-bandwidth spherical needlet experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, value_name = "path")]
    config: Option<PathBuf>,
    /// Output directory for tables, figures, and the manifest.
    #[arg(long, value_name = "dir", default_value = "needlet-output")]
    out: PathBuf,
    /// Master seed for every random choice of the run.
    #[arg(long, value_name = "u64", default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the available cores).
    #[arg(long, value_name = "n")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify growth regimes and tabulate scale diagnostics per family.
    Regimes(CommonArgs),
    /// Tabulate window profiles and the partition-of-unity residual.
    Windows(CommonArgs),
    /// Profile needlet spatial decay across families at one level.
    Localization(CommonArgs),
    /// Compare analytic and Monte-Carlo coefficient correlations.
    Correlation(CommonArgs),
    /// Run the subsampled goodness-of-fit statistic across levels.
    Gof(CommonArgs),
    /// Tabulate one family's scale sequence and separation ratios.
    Scales(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Regimes(a)
            | Command::Windows(a)
            | Command::Localization(a)
            | Command::Correlation(a)
            | Command::Gof(a)
            | Command::Scales(a) => a,
        }
    }
}

/// Parses the config file as the command's schema, or uses defaults.
fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&PathBuf>,
) -> Result<T, RunError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                RunError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                RunError::Config(format!("invalid config {}: {e}", p.display()))
            })
        }
    }
}

fn run(cli: &Cli) -> Result<RunOutput, RunError> {
    let common = cli.command.common();
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(RunError::Config("threads must be at least 1".into()));
        }
        // Ignore the error from configuring twice (tests call run repeatedly).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let seed = common.seed;
    match &cli.command {
        Command::Regimes(a) => {
            let config: RegimesConfig = load_config(a.config.as_ref())?;
            cmd_regimes(&config, seed)
        }
        Command::Windows(a) => {
            let config: WindowsConfig = load_config(a.config.as_ref())?;
            cmd_windows(&config, seed)
        }
        Command::Localization(a) => {
            let config: LocalizationConfig = load_config(a.config.as_ref())?;
            cmd_localization(&config, seed)
        }
        Command::Correlation(a) => {
            let config: CorrelationConfig = load_config(a.config.as_ref())?;
            cmd_correlation(&config, seed)
        }
        Command::Gof(a) => {
            let config: GofFileConfig = load_config(a.config.as_ref())?;
            cmd_gof(&config, seed)
        }
        Command::Scales(a) => {
            let config: ScalesConfig = load_config(a.config.as_ref())?;
            cmd_scales(&config, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.command.common().out.clone();
    match run(&cli).and_then(|output| write_outputs(&out_dir, output)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
