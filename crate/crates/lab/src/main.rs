use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsda_lab::config::{apply_overrides, ExperimentConfig, ExperimentKind, Seeds};
use nsda_lab::runner::{load_config, run_experiment, LabError, RunStatus};
use nsda_lab::PRESET_NAMES;

const EXIT_INVALID: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "nsda", version, about = "Stochastic 3DVAR experiments for 2D Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// Preset name, config JSON or manifest JSON.
    config: String,
    /// Sets all three seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted-path overrides such as `filter.omega=30 horizon=10`.
    #[arg(long, visible_alias = "set", value_name = "KEY=VALUE", num_args = 1..)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its output directory.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory; defaults to runs/<preset>-<config hash>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Write the theoretical bounds of a configuration.
    Bounds {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the preset names.
    ListPresets,
}

fn resolve(source: &Source) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = apply_overrides(&load_config(&source.config)?, &source.overrides)?;
    if let Some(s) = source.seed {
        cfg.seeds = Seeds::all(s);
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| {
        let name = cfg.preset.clone().unwrap_or_else(|| "custom".into());
        PathBuf::from("runs").join(format!("{name}-{}", &cfg.content_hash()[..12]))
    })
}

fn report_invalid(v: &[String]) -> ExitCode {
    eprintln!("configuration is invalid:");
    for line in v {
        eprintln!("  - {line}");
    }
    ExitCode::from(EXIT_INVALID)
}

fn execute(cfg: ExperimentConfig, out: Option<PathBuf>) -> ExitCode {
    let dir = out_dir(&cfg, out);
    match run_experiment(&cfg, &dir) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            match summary.status {
                Some(RunStatus::Diverged { time, message }) => {
                    eprintln!("diverged at t = {time}: {message}; partial outputs in {}", dir.display());
                    ExitCode::from(EXIT_DIVERGED)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(LabError::Invalid(v)) => report_invalid(&v),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let with_cfg = |source: &Source| match resolve(source) {
        Ok(c) => Ok(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            Err(ExitCode::from(EXIT_INVALID))
        }
    };
    match cli.command {
        Command::ListPresets => {
            let mut out = std::io::stdout().lock();
            for name in PRESET_NAMES {
                if writeln!(out, "{name}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { source } => match with_cfg(&source) {
            Ok(cfg) => {
                let v = cfg.validate();
                if v.is_empty() {
                    println!("ok ({})", cfg.content_hash());
                    ExitCode::SUCCESS
                } else {
                    report_invalid(&v)
                }
            }
            Err(code) => code,
        },
        Command::Run { source, out } => match with_cfg(&source) {
            Ok(cfg) => execute(cfg, out),
            Err(code) => code,
        },
        Command::Bounds { source, out } => match with_cfg(&source) {
            Ok(cfg) => execute(ExperimentConfig { kind: ExperimentKind::BoundsReport, ..cfg }, out),
            Err(code) => code,
        },
    }
}
