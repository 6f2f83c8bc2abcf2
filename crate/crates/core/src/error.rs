use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// The Gram matrix of a least-squares design is numerically singular.
    #[error("singular design matrix")]
    SingularDesign,

    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    #[error("inconsistent moments: {0}")]
    InvalidMoments(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Row and column are 1-based, counting the header as row 1.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("repetition {repetition}: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
