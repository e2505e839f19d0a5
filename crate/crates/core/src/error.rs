use thiserror::Error;

use crate::topology::DigitId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tree is disconnected: {0}")]
    DisconnectedTree(String),
    #[error("cycle detected: {0}")]
    CycleDetected(String),
    #[error("digit {0} appears more than once")]
    DuplicateDigit(DigitId),
    #[error("digit {0} is missing")]
    MissingDigit(DigitId),
    #[error("invalid digit label: {0}")]
    InvalidDigit(String),
    #[error("value {0} lies outside [0, 1)")]
    OutOfDomain(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty index set")]
    EmptyIndexSet,
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error("grid point does not assign digit {0}")]
    IncompleteGridPoint(DigitId),
    #[error("networks are defined on different trees")]
    TreeMismatch,
    #[error("point {0:?} does not lie on the grid")]
    OffGridPoint(Vec<f64>),
    #[error("initial network is identically zero")]
    DegenerateInit,
    #[error("variable relabeling collides on variable {0}")]
    LabelCollision(usize),
    #[error("density matrix estimate has vanishing trace")]
    InsufficientSamples,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that stem from malformed input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        !matches!(
            self,
            Error::SvdFailure | Error::DegenerateInit | Error::InsufficientSamples
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
