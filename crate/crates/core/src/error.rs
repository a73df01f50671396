use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: duplicate record id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("invalid annotation {mention:?}: {message}")]
    Annotation { mention: String, message: String },

    #[error("model input format: {0}")]
    Format(String),

    #[error("wikipedia lookup for {title:?} failed after {attempts} attempts: {message}")]
    WikiUnavailable {
        title: String,
        attempts: u32,
        message: String,
    },

    #[error("cannot fit TF-IDF statistics on an empty corpus")]
    EmptyCorpus,

    #[error("cannot evaluate an empty set of pairs")]
    NoPairs,

    #[error("insufficient categorized records: {0}")]
    Insufficient(String),

    #[error("invalid input: {0}")]
    Data(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
