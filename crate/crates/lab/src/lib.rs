//! Front end for the `csl-core` experiments: unit-aware TOML configs,
//! deterministic ensemble runners and CSV/JSON outputs with a manifest.
//!
//! - [`config`]: the run document, its defaults, validation and serialization.
//! - [`units`]: quantities with mandatory unit suffixes.
//! - [`run`]: one runner per subcommand, producing in-memory files.
//! - [`output`]: number formatting, CSV/JSON helpers and the manifest.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod units;

pub use config::{parse_config, parse_config_with, serialize_config, Overrides, Params, RunConfig, Subcommand};
pub use error::LabError;
pub use run::{run, Exec};

use std::path::PathBuf;

/// Runs `cfg` and writes its files into `cfg.output_dir`.
pub fn execute(cfg: &RunConfig, exec: Exec) -> Result<(output::Artifacts, Vec<PathBuf>), LabError> {
    let art = run(cfg, exec)?;
    let written = output::write_run(&cfg.output_dir, cfg, &art)?;
    Ok((art, written))
}
