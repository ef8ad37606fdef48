use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] lincfa::Error),

    #[error("reducer `{reducer}`: {source}")]
    Reducer {
        reducer: String,
        #[source]
        source: lincfa::Error,
    },

    #[error("need at least {min} repetitions, got {reps}")]
    InsufficientRepetitions { reps: usize, min: usize },

    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("invalid experiment: {0}")]
    Experiment(String),
}
