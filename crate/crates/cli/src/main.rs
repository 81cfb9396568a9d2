//! `hardsphere`: runs configured experiments and writes reports, CSV tables
//! and a hashed manifest.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or runtime errors.

mod commands;
mod config;
mod datum;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{load_config, parse_config, ConfigError, RunConfig};

/// Command-line flags.
#[derive(Debug, Parser)]
#[command(name = "hardsphere", version, about = "Hard-sphere Euler laboratory")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    config: Option<PathBuf>,
    /// Bundled configuration, see `--list-presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the configuration.
    #[arg(long)]
    workers: Option<usize>,
    /// Print the bundled preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => {
            let text = presets::get(name).ok_or_else(|| ConfigError {
                message: format!("unknown preset `{name}`; available: {}", presets::names().join(", ")),
            })?;
            parse_config(text)?
        }
        (None, None) => return Err(ConfigError { message: "either --config or --preset is required".into() }),
    };
    if let Some(out) = &cli.out {
        cfg.output = out.to_string_lossy().into_owned();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_presets {
        for name in presets::names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(2);
    }
    match commands::execute(&cfg, &PathBuf::from(&cfg.output)) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.passed {
                println!("{}: passed, artifacts in {}", cfg.command.name(), cfg.output);
                ExitCode::SUCCESS
            } else {
                println!("{}: checks failed, artifacts in {}", cfg.command.name(), cfg.output);
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
