use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radio parameters: {0}")]
    InvalidRadio(String),

    #[error("distance must be positive, got {0} km")]
    InvalidDistance(f64),

    #[error("contour undefined: threshold {threshold_dbm} dBm is not below tx power {tx_dbm} dBm")]
    ContourUndefined { tx_dbm: f64, threshold_dbm: f64 },

    #[error("invalid channel block {lo}+{len} for a ground set of {max} channels")]
    InvalidBlock { lo: u8, len: u8, max: u8 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{path}:{line}: {msg}")]
    Csv {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("duplicate node id {id} at line {line}")]
    DuplicateNode { id: u64, line: u64 },

    #[error("super vertex on {block} references missing child for node {node}")]
    MissingChild { node: usize, block: String },

    #[error("item of size {size} exceeds bin capacity {capacity}")]
    ItemTooLarge { size: f64, capacity: f64 },

    #[error("node {0} belongs to no clique")]
    Unassigned(usize),

    #[error("instance too large for exhaustive search: {0} candidate sets")]
    TooLarge(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    CsvWrite(#[from] csv::Error),
}
