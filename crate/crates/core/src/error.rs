use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration is not regular")]
    NotRegular,
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("window size {0} exceeds the enumeration guard of 16")]
    WindowTooLarge(usize),
    #[error("density {0} is not in [0,1]")]
    InvalidDensity(f64),
    #[error("cannot parse configuration literal: {0}")]
    Parse(String),
    #[error("epsilon {0} is outside (0,1)")]
    EpsilonOutOfRange(f64),
    #[error("invalid time {0}")]
    InvalidTime(f64),
    #[error("particle reached site {site}, truncation bound is {n_trunc}")]
    TruncationBreach { site: usize, n_trunc: usize },
    #[error("state space not closed under transitions: {0}")]
    NotClosed(String),
    #[error("site {0} outside the field range")]
    SiteOutOfRange(i64),
    #[error("time mismatch: {0}")]
    TimeMismatch(String),
    #[error("time {t} exceeds trajectory horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("trajectory was recorded without an event log")]
    MissingLog,
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("tail not certified: {0}")]
    TailNotCertified(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("stability guard violated: {0}")]
    Stability(String),
    #[error("grid of {0} cells exceeds the memory guard")]
    GridTooLarge(usize),
    #[error("mass leaked through the far boundary: {0:e}")]
    Leakage(f64),
    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),
    #[error("compute budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
