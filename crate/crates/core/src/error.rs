use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on `{token}`")]
    SelfLoop { line: usize, token: String },

    #[error("invalid node token {0:?}")]
    InvalidToken(String),

    #[error("duplicate node token `{0}`")]
    DuplicateToken(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("node `{0}` has already been queried")]
    AlreadyQueried(String),

    #[error("{what}: {limit} exceeded ({actual}); use the Monte Carlo estimator")]
    LimitExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query budget exhausted")]
    BudgetExhausted,

    #[error("no unqueried nodes remain")]
    RosterExhausted,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("attendance includes nodes that were not invited: {0:?}")]
    NotInvited(Vec<String>),

    #[error("normalizer is zero for p = {0}")]
    ZeroNormalizer(f64),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
