use thiserror::Error;

/// Errors produced by the solvers, the simulator and the analytics engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("calibration failed: best pair {ell:?}/{choice:?} deviates by {max_deviation:.6} (limit {limit})")]
    Calibration {
        ell: crate::naive::EllVariant,
        choice: crate::naive::ChoiceProbVariant,
        max_deviation: f64,
        limit: f64,
    },

    #[error("malformed trial records: {0}")]
    Malformed(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
