use std::path::PathBuf;

use csl_core::error::ErrorClass;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad command line or config document.
    pub const CONFIG: i32 = 2;
    /// Parameters the numerical core rejects.
    pub const INPUT: i32 = 3;
    /// A numerical procedure missed its accuracy contract.
    pub const NUMERICAL: i32 = 4;
    /// Reading the config or writing outputs failed.
    pub const IO: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] csl_core::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => exit::CONFIG,
            LabError::Core(e) => match e.class() {
                ErrorClass::Input => exit::INPUT,
                ErrorClass::Numerical => exit::NUMERICAL,
            },
            LabError::Io { .. } => exit::IO,
        }
    }
}
