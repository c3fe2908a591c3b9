use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // container formats
    #[error("bad magic at byte 0: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },
    #[error("unsupported format version {version} at byte {offset}")]
    UnsupportedVersion { version: u16, offset: usize },
    #[error("truncated payload: expected {expected} bytes at byte {offset}, found {found}")]
    TruncatedPayload {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed header at byte {offset}: {message}")]
    MalformedHeader { offset: usize, message: String },

    // metadata table
    #[error("missing metadata file {0}")]
    MissingMetadataFile(PathBuf),
    #[error("metadata line {line}: {message}")]
    MetadataParse { line: u64, message: String },
    #[error("no sample passed validation")]
    NoValidSamples,

    // data model
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    // preprocessing
    #[error("despike window {window} exceeds the smallest spectrum dimension {min_dim}")]
    WindowTooLarge { window: usize, min_dim: usize },
    #[error("degenerate spectrum {0}: no positive intensity to normalize by")]
    DegenerateSpectrum(String),
    #[error("binning to fewer than two points along an axis ({0})")]
    BinTooCoarse(String),

    // features and models
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("impurity of an empty node")]
    EmptyNode,

    // evaluation
    #[error("class {0} too small to split")]
    ClassTooSmall(String),
    #[error("{k} folds requested, at most {n} possible")]
    KTooLarge { k: usize, n: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("{0} samples carry no label")]
    UnlabeledSamples(usize),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::ConfigInvalid(msg.into())
    }
}
