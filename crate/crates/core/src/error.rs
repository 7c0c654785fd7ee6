use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the pipeline. The `Display` form starts with the
/// module that produced the error so CLI diagnostics can be attributed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus: line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("corpus: duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("corpus: document {0:?} has empty text")]
    EmptyText(String),

    #[error("corpus: document {0:?} is unlabeled")]
    Unlabeled(String),

    #[error("corpus: {0}")]
    Split(String),

    #[error("text: empty document")]
    EmptyDocument,

    #[error("resources: {name}: line {line}: {message}")]
    Resource {
        name: String,
        line: usize,
        message: String,
    },

    #[error("embeddings: line {line}: {message}")]
    Embedding { line: usize, message: String },

    #[error("features: missing resource {0}")]
    MissingResource(String),

    #[error("features: {0}")]
    Features(String),

    #[error("classifiers: {0}")]
    Training(String),

    #[error("classifiers: dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("evaluation: fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("evaluation: leakage audit failed on fold {fold}: {what}")]
    Leakage { fold: usize, what: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
