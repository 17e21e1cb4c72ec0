use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus contains no tokens")]
    NoTokens,
    #[error("label file has {found} lines but the corpus has {expected} documents")]
    LabelAlignment { expected: usize, found: usize },
    #[error("blank label on line {line}")]
    BlankLabel { line: usize },
    #[error("embedding line {line}: expected {expected} components, found {found}")]
    EmbeddingDimension { line: usize, expected: usize, found: usize },
    #[error("no vocabulary word has an embedding")]
    NoEmbeddingCoverage,
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("invalid sampling weights: {0}")]
    InvalidWeights(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("corpus yields no biterms and no single-token documents")]
    NoBiterms,
    #[error("corpus has no co-occurring word pairs")]
    NoCooccurrence,
    #[error("no token of the new corpus is in the model vocabulary")]
    VocabularyMismatch,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("class '{label}' has {count} instance(s); at least 2 are needed to stratify")]
    Stratify { label: String, count: usize },
    #[error("{what}: row {row} has {found} columns, expected {expected}")]
    RaggedRow { what: String, row: usize, expected: usize, found: usize },
    #[error("{what}: row {row} sums to {sum}")]
    RowSum { what: String, row: usize, sum: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
