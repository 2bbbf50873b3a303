use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {left:?}, right is {right:?}")]
    ShapeMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },

    #[error("data length {len} does not match shape {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("mean over an empty row subset")]
    EmptySubset,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("k = {k} out of range for {len} values")]
    TopKOutOfRange { k: usize, len: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("label count {labels} does not match row count {rows}")]
    LabelCount { labels: usize, rows: usize },

    #[error("{0}: backward called before forward")]
    BackwardBeforeForward(&'static str),

    #[error("drop probability {0} outside [0, 1)")]
    InvalidDropProbability(f64),

    #[error("drop fraction {0} outside [0, 1]")]
    InvalidDropFraction(f64),

    #[error("drop fraction {p} removes all {units} units of the layer")]
    DropsAllUnits { p: f64, units: usize },

    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    #[error("per-row labels are required for label-indexed masks")]
    MissingLabels,

    #[error("standard dropout in train mode needs a random number generator")]
    MissingRng,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated {what}: expected {expected} bytes, found {actual}")]
    Truncated { what: &'static str, expected: usize, actual: usize },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("CIFAR-10 file size {len} is not a multiple of {record} bytes")]
    CifarRecordSize { len: usize, record: usize },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("malformed mask trace line {line}: {reason}")]
    MaskTrace { line: usize, reason: String },

    #[error("eigendecomposition produced non-finite eigenvalues")]
    NonFiniteEigen,

    #[error("requested {requested} samples but only {available} are available")]
    Budget { requested: usize, available: usize },

    #[error("split leaves the {0} partition empty")]
    EmptyPartition(&'static str),

    #[error("stratified sampling of {n} rows needs at least one row per class ({classes} classes)")]
    StratifiedTooSmall { n: usize, classes: usize },

    #[error("class {class} has {available} samples, stratified quota is {quota}")]
    ClassQuota { class: usize, quota: usize, available: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
