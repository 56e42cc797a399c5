use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("mismatched grids: {0}")]
    GridMismatch(String),
    #[error("cube outside domain")]
    CubeOutsideDomain,
    #[error("resolution insufficient for level {0}")]
    Resolution(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ill-conditioned moment system (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
