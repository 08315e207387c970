use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected reading from {sensor_id}: {reason}")]
    RejectedReading { sensor_id: String, reason: String },

    #[error("no data to fuse")]
    NoData,

    #[error("history out of order: {incoming} ms is not after {newest} ms")]
    Ordering { newest: u64, incoming: u64 },

    #[error("illegal status transition {from} -> {to} for record {record_id}")]
    Transition {
        record_id: String,
        from: String,
        to: String,
    },

    #[error("invalid alert: {0}")]
    InvalidAlert(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
