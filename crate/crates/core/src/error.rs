use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hinge loss requires a label in {{-1, +1}}, got {0}")]
    InvalidLabel(f64),

    #[error("task {0} has no examples")]
    EmptyTask(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unknown task {task} (model covers {tasks} tasks)")]
    UnknownTask { task: usize, tasks: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("operation requires a {expected} configuration")]
    ModeMismatch { expected: &'static str },

    #[error("solver diverged at iteration {iteration}: objective {objective}")]
    Divergence { iteration: usize, objective: f64 },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: column `{column}` is not numeric: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("task `{task}` has no {split} rows after splitting")]
    EmptySplit { task: String, split: &'static str },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("corrupt IDX file: {0}")]
    Idx(String),

    #[error("class {0} is absent from the retained subsample")]
    ClassAbsent(usize),

    #[error("inconclusive configuration: {0}")]
    Inconclusive(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
