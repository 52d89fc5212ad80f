use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("shape coordinate {coord} = {value} out of bounds{}", time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    ShapeOutOfBounds { coord: &'static str, value: f64, time: Option<f64> },
    #[error("resistance matrix is singular (condition estimate {condition:e})")]
    SingularResistance { condition: f64 },
    #[error("numeric determinant {numeric} disagrees with closed form {closed}")]
    CrossCheckFailure { numeric: f64, closed: f64 },
    #[error("invalid bracket spec: {0}")]
    InvalidBracket(String),
    #[error("invalid control signal: {0}")]
    InvalidSignal(String),
    #[error("no published closed form {name} for model {model}")]
    UnknownClosedForm { model: String, name: String },
    #[error("time {0} is not a sample time of the trajectory")]
    TimeNotSampled(f64),
    #[error("channel mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attaches a simulation time to a bounds violation.
    pub fn at_time(self, t: f64) -> Error {
        match self {
            Error::ShapeOutOfBounds { coord, value, time: None } => {
                Error::ShapeOutOfBounds { coord, value, time: Some(t) }
            }
            other => other,
        }
    }
}
