//! Command-line front end for the group anonymity toolkit.

use clap::{Args, Parser, Subcommand};
use group_anonymity::cli::{cmd_inspect, cmd_mask, cmd_verify};
use group_anonymity::config::{Mode, RunConfig};
use group_anonymity::masking::RoundingMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "groupanon",
    about = "Mask group-level features of a statistical microfile",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the configured pipeline: quantity, concentration, difference
    #[arg(long)]
    mode: Option<Mode>,
    /// Override the redistribution seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the reconstruction offset (omit for automatic)
    #[arg(long)]
    offset: Option<f64>,
    /// Override the rounding mode: nearest, sum-preserving
    #[arg(long)]
    rounding: Option<RoundingMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Mask the configured signal and rewrite the microfile
    Mask {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Show the signal, its wavelet decomposition, and flagged extrema
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
        /// Write plot-ready tab-separated series to this file
        #[arg(long)]
        emit_plot: Option<PathBuf>,
    },
    /// Check a masked file against the original
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// The original microfile
        original: PathBuf,
        /// The masked microfile
        masked: PathBuf,
    },
}

fn load_config(common: &CommonArgs) -> group_anonymity::Result<RunConfig> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(mode) = common.mode {
        config.mode = mode;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(offset) = common.offset {
        config.offset = Some(offset);
    }
    if let Some(rounding) = common.rounding {
        config.rounding = rounding;
    }
    Ok(config)
}

fn run() -> group_anonymity::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Mask { common } => {
            let config = load_config(&common)?;
            let outcome = cmd_mask(&config)?;
            for group in &outcome.record.groups {
                println!(
                    "{}: {} moves, detail ratio {:.4}, max deviation {:.3e}",
                    group.name, group.moves, group.detail_ratio, group.max_detail_deviation
                );
            }
            println!("wrote {}", config.output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Inspect { common, emit_plot } => {
            let config = load_config(&common)?;
            let text = cmd_inspect(&config, emit_plot.as_deref())?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            common,
            original,
            masked,
        } => {
            let config = load_config(&common)?;
            let outcome = cmd_verify(&config, &original, &masked)?;
            print!("{}", outcome.report);
            Ok(if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
