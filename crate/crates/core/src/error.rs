//! Crate-wide error type. Every fallible operation in the engine returns
//! [`Result`] with one of these variants.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Tensor or layer shape mismatch.
    Shape(String),
    /// Batch-statistics layer called in train mode with batch size 1.
    DegenerateBatch(String),
    /// A label row is not a valid one-hot vector or is out of range.
    Label(String),
    /// Analytic gradient is non-finite.
    Gradient(String),
    /// Bad configuration value (unknown convention, fraction out of range, ...).
    Config(String),
    /// Dataset directory ingestion failure.
    Ingest(String),
    /// Pixel data out of the documented range.
    Data(String),
    /// A class is too small to stratify.
    Split(String),
    /// A minority class is too small for the requested neighbor count.
    Smote(String),
    /// Pretrained-weight import shape mismatch.
    Transfer(String),
    /// A named archive entry or model parameter does not exist.
    NotFound(String),
    /// Training aborted (non-finite loss or gradient).
    Training(String),
    /// Checkpoint file corrupt, truncated, or incompatible with the graph.
    Checkpoint(String),
    /// Weight-archive encoding or decoding failure.
    Archive(String),
    /// Ensemble member predictions disagree in shape.
    Ensemble(String),
    /// Metric computation impossible (empty matrix, single-class truth, ...).
    Evaluation(String),
    /// Statistical test has no information (all paired differences zero).
    DegenerateTest(String),
    /// Filesystem failure, with the offending path where known.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::DegenerateBatch(m) => write!(f, "degenerate batch: {m}"),
            Error::Label(m) => write!(f, "label error: {m}"),
            Error::Gradient(m) => write!(f, "gradient error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Ingest(m) => write!(f, "ingestion error: {m}"),
            Error::Data(m) => write!(f, "data error: {m}"),
            Error::Split(m) => write!(f, "split error: {m}"),
            Error::Smote(m) => write!(f, "smote error: {m}"),
            Error::Transfer(m) => write!(f, "transfer error: {m}"),
            Error::NotFound(m) => write!(f, "not found: {m}"),
            Error::Training(m) => write!(f, "training error: {m}"),
            Error::Checkpoint(m) => write!(f, "checkpoint error: {m}"),
            Error::Archive(m) => write!(f, "archive error: {m}"),
            Error::Ensemble(m) => write!(f, "ensemble error: {m}"),
            Error::Evaluation(m) => write!(f, "evaluation error: {m}"),
            Error::DegenerateTest(m) => write!(f, "degenerate test: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
