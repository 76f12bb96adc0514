use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config {path}: {source}")]
    Config {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        source: adiaquant::Error,
    },

    #[error(transparent)]
    Core(#[from] adiaquant::Error),
}

impl CliError {
    /// 0 ok, 2 usage, 3 parse, 4 capacity, 5 numerical failure.
    pub fn exit_code(&self) -> u8 {
        use adiaquant::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => 2,
            CliError::Config { .. } => 3,
            CliError::Instance { source, .. } | CliError::Core(source) => match source {
                E::InvalidClause(_) | E::Syntax { .. } => 3,
                E::Capacity { .. } => 4,
                E::NoConvergence { .. }
                | E::NormDrift { .. }
                | E::StepTooLarge { .. }
                | E::Unnormalized(_)
                | E::ZeroGap => 5,
                E::DimensionMismatch { .. }
                | E::InvalidArgument(_)
                | E::Unsatisfiable(_)
                | E::Unsupported(_) => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
