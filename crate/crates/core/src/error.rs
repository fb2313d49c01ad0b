use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {msg}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate clip id `{id}` in {dataset}/{subset}")]
    DuplicateId {
        id: String,
        dataset: String,
        subset: String,
    },

    #[error("records without source_key: {}", ids.join(", "))]
    MissingSourceKey { ids: Vec<String> },

    #[error("dataset {0} not present in the pool")]
    MissingDataset(String),

    #[error("non-target pool has {available} clips but {needed} are required")]
    InsufficientPool { needed: usize, available: usize },

    #[error("item `{item}` has {found} reference(s), at least {required} required")]
    TooFewReferences {
        item: String,
        found: usize,
        required: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{format} format: {msg}")]
    Format { format: &'static str, msg: String },

    #[error("unknown token id {0}")]
    UnknownToken(usize),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("batch item {item}: every token is forbidden at step {step}")]
    AllTokensForbidden { item: usize, step: usize },

    #[error("no audio features for clip `{0}`")]
    MissingFeatures(String),

    #[error("no sentence embedding for key {0}")]
    MissingEmbedding(String),

    #[error("zero-norm embedding")]
    ZeroVector,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used as the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Manifest { .. } => "manifest",
            Error::DuplicateId { .. } => "duplicate-id",
            Error::MissingSourceKey { .. } => "missing-source-key",
            Error::MissingDataset(_) => "missing-dataset",
            Error::InsufficientPool { .. } => "insufficient-pool",
            Error::TooFewReferences { .. } => "too-few-references",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::Shape(_) => "shape",
            Error::NonFinite(_) => "non-finite",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Format { .. } => "format",
            Error::UnknownToken(_) => "unknown-token",
            Error::UnknownTask(_) => "unknown-task",
            Error::AllTokensForbidden { .. } => "all-forbidden",
            Error::MissingFeatures(_) => "missing-features",
            Error::MissingEmbedding(_) => "missing-embedding",
            Error::ZeroVector => "zero-vector",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
        }
    }
}
