use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("jet operands do not match: {0}")]
    JetMismatch(String),

    #[error("singular jet: constant term is zero")]
    SingularJet,

    #[error("multiindex ({0}, {1}) exceeds jet degree {2}")]
    OutOfDegree(usize, usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sequence is not log-convex: M_{{k+1}}/M_k decreases at k = {k}")]
    NotLogConvex { k: u64 },

    #[error("index {k} is beyond the sequence horizon {horizon}")]
    Horizon { k: u64, horizon: u64 },

    #[error("exact arithmetic unavailable: {0}")]
    ExactUnavailable(String),

    #[error("Ostrowski sup not attained below horizon {0}")]
    Saturated(u64),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
