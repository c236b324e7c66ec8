use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EdlError>;

#[derive(Debug, Error)]
pub enum EdlError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("priors for surface form {surface:?} ({language}) sum to {sum}, expected 1.0")]
    PriorSum {
        language: String,
        surface: String,
        sum: f64,
    },

    #[error("topic ontology contains a cycle: {}", .0.join(" -> "))]
    OntologyCycle(Vec<String>),

    #[error("unknown topic {0:?}")]
    UnknownTopic(String),

    #[error("dictionary invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported language {0:?}")]
    UnsupportedLanguage(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty text")]
    EmptyText,

    #[error("no trained language profiles")]
    NoProfiles,

    #[error("mention {0:?} has no candidate entities")]
    NoCandidates(String),

    #[error("candidate {entity} is not listed for mention {surface:?}")]
    NotACandidate { surface: String, entity: String },

    #[error("training data: {0}")]
    Training(String),

    #[error("mention spans do not align: {0}")]
    Alignment(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl EdlError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        EdlError::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        EdlError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
