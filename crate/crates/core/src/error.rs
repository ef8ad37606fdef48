use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate sample: need at least 2 observations, got {n}")]
    DegenerateSample { n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("column `{column}` has zero variance")]
    ZeroVariance { column: String },

    #[error("column `{column}` contains a non-finite value at row {row}")]
    NonFiniteValue { column: String, row: usize },

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("dataset needs at least one column")]
    NoColumns,

    #[error("singular design: smallest Gram eigenvalue {min_eigenvalue:e} below 1e-10 x largest {max_eigenvalue:e}")]
    SingularDesign {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("insufficient samples: n = {n} must exceed p + 1 = {}", p + 1)]
    InsufficientSamples { n: usize, p: usize },

    #[error("{what} must be positive, got {value}")]
    NonPositiveVariance { what: &'static str, value: f64 },

    #[error("collinear pair: sample moment determinant {determinant:e} is not positive")]
    Collinear { determinant: f64 },

    #[error("degenerate sum: variance of x1 + x2 is {value:e}")]
    DegenerateSum { value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("{mode} threshold needs `{field}`")]
    MissingMoment {
        mode: &'static str,
        field: &'static str,
    },

    #[error("quantile domain error: {0}")]
    QuantileDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal inconsistency: {what} = {value:e} is below the round-off floor")]
    Inconsistent { what: &'static str, value: f64 },

    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("schema mismatch: missing {missing:?}, extra {extra:?}")]
    SchemaMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("invalid reducer configuration: {0}")]
    Config(String),

    #[error("pair ({left}, {right}): {source}")]
    Pair {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite cell at row {row}, column {column}")]
    NonFiniteCell { row: usize, column: usize },

    #[error("target column `{0}` not found")]
    MissingTarget(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
