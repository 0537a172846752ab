use std::path::PathBuf;

use thiserror::Error;

use crate::chronology::{ChronologyError, ContextId};
use crate::inference::InferenceError;
use crate::intensity::IntensityError;
use crate::priors::PriorError;
use crate::simulation::SimulationError;

/// Process exit code for input-validation failures.
pub const EXIT_INVALID_INPUT: u8 = 2;
/// Process exit code for I/O failures.
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Chronology(#[from] ChronologyError),

    #[error(transparent)]
    Intensity(#[from] IntensityError),

    #[error(transparent)]
    Inference(#[from] InferenceError),

    #[error(transparent)]
    Prior(#[from] PriorError),

    #[error(transparent)]
    Simulation(#[from] SimulationError),

    #[error("{source_name}, line {line}{}: {message}", at_column(.column))]
    Input {
        source_name: String,
        line: u64,
        /// Offending column name; empty for whole-record problems.
        column: String,
        message: String,
    },

    #[error("finds reference unknown contexts: {}", join_ids(.0))]
    DanglingContexts(Vec<ContextId>),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn at_column(column: &str) -> String {
    if column.is_empty() {
        String::new()
    } else {
        format!(", column {column}")
    }
}

fn join_ids(ids: &[ContextId]) -> String {
    ids.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID_INPUT,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
