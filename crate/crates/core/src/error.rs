use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("line {line}: label `{value}` is not a non-negative integer")]
    InvalidLabel { line: u64, value: String },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("invalid model file: {0}")]
    InvalidModel(String),

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("training documents produced an empty vocabulary")]
    EmptyVocabulary,

    #[error("unknown feature index {0}")]
    UnknownFeature(usize),

    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },

    #[error("non-finite feature value at sample {sample}")]
    NonFiniteFeature { sample: usize },

    #[error("training produced non-finite weights")]
    Diverged,

    #[error("at least two distinct classes are required, found {0}")]
    SingleClass(usize),

    #[error("label {0} is not among the known classes")]
    UnknownLabel(u32),

    #[error("nothing to evaluate: confusion matrix is empty")]
    EmptyEvaluation,

    #[error("cannot build {k} folds from {n} samples")]
    TooManyFolds { k: usize, n: usize },

    #[error("grid axis `{0}` is empty")]
    EmptyAxis(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("candidate {index}: {source}")]
    Candidate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// True for failures of the optimizer or the arithmetic rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Diverged | Error::NonFiniteFeature { .. } => true,
            Error::Fold { source, .. } | Error::Candidate { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
