use lincfa_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lincfa::Error),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    /// Process exit status. 1 is reserved for failed checks and 2 for
    /// usage errors; every library error kind has its own code.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => core_code(e),
            CliError::Lab(e) => lab_code(e),
        }
    }
}

fn lab_code(e: &LabError) -> u8 {
    match e {
        LabError::Core(e) => core_code(e),
        LabError::Reducer { source, .. } => core_code(source),
        LabError::InsufficientRepetitions { .. } => 40,
        LabError::Spec(_) => 41,
        LabError::Experiment(_) => 42,
    }
}

fn core_code(e: &lincfa::Error) -> u8 {
    use lincfa::Error::*;
    match e {
        DegenerateSample { .. } => 10,
        LengthMismatch { .. } => 11,
        ZeroVariance { .. } => 12,
        NonFiniteValue { .. } => 13,
        DuplicateColumn(_) => 14,
        NoColumns => 15,
        SingularDesign { .. } => 16,
        InsufficientSamples { .. } => 17,
        NonPositiveVariance { .. } => 18,
        Collinear { .. } => 19,
        DegenerateSum { .. } => 20,
        Degenerate(_) => 21,
        MissingMoment { .. } => 22,
        QuantileDomain(_) => 23,
        InvalidInput(_) => 24,
        Inconsistent { .. } => 25,
        IndexOutOfRange { .. } => 26,
        SchemaMismatch { .. } => 27,
        Config(_) => 28,
        Pair { source, .. } => core_code(source),
        Parse { .. } => 30,
        NonFiniteCell { .. } => 31,
        MissingTarget(_) => 32,
        Csv(_) => 33,
        Json(_) => 34,
        Io(_) => 35,
    }
}
