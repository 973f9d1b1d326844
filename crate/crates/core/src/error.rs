use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid outcome model: {0}")]
    InvalidModel(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid test definition: {0}")]
    InvalidTest(String),

    #[error("outcome {value} is incompatible with the {family} family")]
    IncompatibleOutcome { family: &'static str, value: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("numerical failure in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },

    #[error("calibration: {0}")]
    Calibration(String),

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by configuration rather than arithmetic.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::InvalidModel(_)
            | Error::InvalidPrior(_)
            | Error::InvalidDesign(_)
            | Error::InvalidTest(_)
            | Error::Calibration(_) => true,
            Error::Replicate { source, .. } => source.is_configuration(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
