use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = LsaError> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum LsaError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("label error at line {line}: {message}")]
    Label { line: usize, message: String },

    #[error("corpus is empty or has no usable tokens")]
    EmptyCorpus,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix semantics mismatch: {0}")]
    Semantics(String),

    #[error("matrix has no nonzero entries")]
    EmptyMatrix,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD did not converge after {steps} Lanczos steps (worst residual {residual:e})")]
    Convergence { steps: usize, residual: f64 },

    #[error("document {id} has no weighted term in the space vocabulary")]
    EmptyProjection { id: String },

    #[error("unsupported space file version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error("space file checksum mismatch or truncated file")]
    Checksum,

    #[error("space file is malformed: {0}")]
    SpaceFormat(String),

    #[error("no measurement scale could be projected into the space")]
    NoScales,

    #[error("vectors come from different spaces ({expected} vs {found})")]
    SpaceMismatch { expected: String, found: String },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("neighbor list is empty")]
    EmptyNeighborList,

    #[error("no gold label for review {0}")]
    MissingGold(String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LsaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LsaError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the caller's inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, LsaError::Convergence { .. })
    }
}
