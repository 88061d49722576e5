use thiserror::Error;

/// User errors exit 1; data errors exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn user(msg: impl Into<String>) -> CliError {
        CliError::User(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }
}

macro_rules! data_error_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error_from!(
    std::io::Error,
    traitstat_core::ingest::IngestError,
    traitstat_core::scoring::ScoringError,
    traitstat_core::regress::RegressError,
    traitstat_core::chaid::ChaidError,
    traitstat_core::statcore::StatError,
    traitstat_core::report::ReportError
);
