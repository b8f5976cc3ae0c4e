use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed values that violate an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model specification (potential, grid, couplings, sweep) is malformed.
    #[error("configuration error: {0}")]
    Config(String),

    /// The inputs are well formed but the two-mode treatment does not apply.
    #[error("model validity: {0}")]
    ModelValidity(String),

    /// The eigensolver could not deliver a parity-classified doublet.
    #[error("solver error: {0}")]
    Solver(String),

    /// A sweep point failed; the grid indices identify it.
    #[error("sweep point (ix={ix}, iy={iy}) failed: {source}")]
    SweepPoint {
        ix: usize,
        iy: usize,
        #[source]
        source: Box<Error>,
    },

    /// An internal consistency check failed.
    #[error("internal assertion: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn validity(msg: impl Into<String>) -> Self {
        Error::ModelValidity(msg.into())
    }

    /// The error that ultimately caused this one, unwrapping sweep-point context.
    pub fn root(&self) -> &Error {
        match self {
            Error::SweepPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
