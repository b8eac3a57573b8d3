use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("merge window outside time extent: {0}")]
    MergeWindow(String),
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("fault location mismatch: {0}")]
    FaultLocation(String),
    #[error("qubit cap exceeded: {n} > {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("unknown measurement label {0}")]
    UnknownLabel(usize),
    #[error("detector graph construction: {0}")]
    Graph(String),
    #[error("infeasible syndrome parity: {0}")]
    Infeasible(String),
    #[error("worldline configuration is not closed: {0}")]
    NotClosed(String),
    #[error("record length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
