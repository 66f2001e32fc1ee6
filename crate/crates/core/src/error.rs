use std::path::PathBuf;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("covariance is rank deficient (eigenvalue ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("window of {len} samples is too short for {channels} channels")]
    WindowTooShort { len: usize, channels: usize },
    #[error("window {start}..{end} lies outside a record of {n_samples} samples")]
    InvalidWindow { start: usize, end: usize, n_samples: usize },
    #[error("empty statistics window")]
    EmptyWindow,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in channel {channel} at sample {sample}")]
    NonFinite { channel: usize, sample: usize },
    #[error("time column is not a uniform grid at line {line}")]
    UngriddedData { line: usize },
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("Newton optimisation did not converge (best gradient norm {grad_norm:.3e})")]
    NoConvergence { grad_norm: f64 },
    #[error("no oscillation found: {0}")]
    NoOscillation(String),
    #[error("fit diverged: {0}")]
    FitDiverged(String),
    #[error("could not bracket the chemical potential")]
    BracketingFailed,
    #[error("point ({x}, {y}) lies outside the spatial grid")]
    PointOutsideGrid { x: f64, y: f64 },
    #[error("ill-conditioned basis (condition number {cond:.3e})")]
    IllConditionedBasis { cond: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
