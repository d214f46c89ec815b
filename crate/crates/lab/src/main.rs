use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser};

use csl_lab::config::{Overrides, Subcommand};
use csl_lab::error::exit;
use csl_lab::{execute, parse_config_with, Exec, LabError};

/// Collapse-model experiments with reproducible outputs.
#[derive(Debug, Parser)]
#[command(name = "csl-lab", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML run document; without it the subcommand's defaults are used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble size for collapse, epr, frame and noise.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Run members one after another instead of on all cores.
    #[arg(long)]
    sequential: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn load(cli: &Cli) -> Result<csl_lab::RunConfig, LabError> {
    let overrides = Overrides { seed: cli.seed, output_dir: cli.out.clone(), trajectories: cli.trajectories };
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?,
        None => format!("subcommand = \"{}\"\n", cli.subcommand),
    };
    let cfg = parse_config_with(&text, &overrides)?;
    if cfg.subcommand() != cli.subcommand {
        return Err(LabError::Config(format!(
            "config is for subcommand {} but {} was requested",
            cfg.subcommand(),
            cli.subcommand
        )));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::CONFIG as u8),
            };
        }
    };
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let result = load(&cli).and_then(|cfg| execute(&cfg, exec).map(|r| (cfg, r)));
    match result {
        Ok((cfg, (art, _))) => {
            if !cli.quiet {
                print!("{}", art.report);
                println!("wrote {} files to {}", art.files.len() + 2, cfg.output_dir.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("csl-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
