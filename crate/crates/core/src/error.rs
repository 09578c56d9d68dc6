use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = UnmixError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum UnmixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid rank: {endmembers} endmembers requested for a {pixels}x{bands} matrix")]
    InvalidRank {
        endmembers: usize,
        pixels: usize,
        bands: usize,
    },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("not a descent direction (slope = {0})")]
    NotDescentDirection(f64),
    #[error("abundance row {0} sums to zero")]
    ZeroRow(usize),
    #[error("zero-norm vector in angle computation")]
    ZeroVector,
    #[error("endmember count mismatch: truth has {truth}, estimate has {estimate}")]
    RankMismatch { truth: usize, estimate: usize },
    #[error("exhaustive matching supports at most {max} endmembers, got {got}")]
    TooManyEndmembers { got: usize, max: usize },
    #[error("label {0} has no signature mapping")]
    UnmappedLabel(u32),
    #[error("signature '{0}' not found in library")]
    UnknownSignature(String),
    #[error("{rows}x{cols} raster is not divisible by factor {factor}")]
    IndivisibleDims { rows: usize, cols: usize, factor: usize },
    #[error("block at low-resolution pixel ({row}, {col}) contains only unlabeled pixels")]
    EmptyBlock { row: usize, col: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("wavelengths are not strictly increasing at row {0}")]
    NonMonotoneWavelengths(usize),
    #[error("negative reflectance {value} for '{signature}'")]
    NegativeReflectance { signature: String, value: f64 },
    #[error("negative label {0}")]
    NegativeLabel(i64),
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl UnmixError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        UnmixError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        UnmixError::DimensionMismatch(msg.into())
    }
}
