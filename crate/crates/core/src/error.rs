use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-positive density {rho}")]
    NonPositiveDensity { rho: f64 },

    #[error("non-positive pressure {pressure}")]
    NonPositivePressure { pressure: f64 },

    #[error("invalid gas model: gamma = {gamma} must be > 1")]
    InvalidGamma { gamma: f64 },

    #[error("inadmissible state in cell {cell} at t = {time}: {reason}")]
    InadmissibleState {
        cell: usize,
        time: f64,
        reason: String,
    },

    #[error("inadmissible intermediate state W{index} in the wave decomposition")]
    IntermediateStateInadmissible { index: usize },

    #[error("eigenvector basis is numerically singular (condition estimate {condition:e})")]
    SingularEigenbasis { condition: f64 },

    #[error("closed-form acoustic solution needs t >= {min_time}, got t = {time}")]
    RegimeNotReached { time: f64, min_time: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed mesh: {0}")]
    MalformedMesh(String),

    #[error("face {face} is not an internal face")]
    NotInternalFace { face: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Attach a cell index and time to a pointwise admissibility failure.
    pub fn at_cell(self, cell: usize, time: f64) -> Error {
        match self {
            Error::InadmissibleState { .. } => self,
            other => Error::InadmissibleState {
                cell,
                time,
                reason: other.to_string(),
            },
        }
    }

    /// True for failures that come from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveDensity { .. }
                | Error::NonPositivePressure { .. }
                | Error::InadmissibleState { .. }
                | Error::IntermediateStateInadmissible { .. }
                | Error::SingularEigenbasis { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
