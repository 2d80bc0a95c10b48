use std::io;
use std::path::PathBuf;

use lora_place_core::{CoverageError, PlacementError, PropagationError, SceneError};

use crate::gridio::GainFileError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: invalid JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Scene { path: PathBuf, source: SceneError },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    GainFile {
        path: PathBuf,
        source: GainFileError,
    },

    #[error("missing input file(s): {}", .0.join(", "))]
    MissingInputs(Vec<String>),

    #[error("site {site}: {source}")]
    Propagation {
        site: usize,
        source: PropagationError,
    },

    #[error(transparent)]
    Coverage(#[from] CoverageError),

    #[error(transparent)]
    Placement(#[from] PlacementError),

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Process exit status: 2 for configuration or validation problems, 3 for
    /// I/O failures, 4 for computation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json { .. } | Error::Scene { .. } | Error::Config(_) => 2,
            Error::GainFile { source, .. } if !source.is_io() => 2,
            Error::GainFile { .. }
            | Error::Io { .. }
            | Error::MissingInputs(_)
            | Error::Csv { .. } => 3,
            Error::Propagation { .. } | Error::Coverage(_) | Error::Placement(_) => 4,
        }
    }
}
