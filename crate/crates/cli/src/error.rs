use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] microswim::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 0 ok, 1 configuration, 2 cross-check, 3 runtime bounds.
    pub fn exit_code(&self) -> u8 {
        use microswim::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::CrossCheckFailure { .. } => 2,
                E::ShapeOutOfBounds { .. } | E::SingularResistance { .. } | E::NonFinite(_) | E::TimeNotSampled(_) => 3,
                E::InvalidBracket(_)
                | E::InvalidSignal(_)
                | E::UnknownClosedForm { .. }
                | E::ChannelMismatch { .. }
                | E::InvalidParams(_) => 1,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use microswim::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(E::CrossCheckFailure { numeric: 1.0, closed: 2.0 }).exit_code(), 2);
        let bounds = E::ShapeOutOfBounds { coord: "a", value: 0.0, time: Some(1.0) };
        assert_eq!(CliError::from(bounds).exit_code(), 3);
        assert_eq!(CliError::from(E::InvalidBracket("[".into())).exit_code(), 1);
    }
}
