use thiserror::Error;

/// Errors raised by the library. Protocol rejections are not errors; they are
/// reported through [`crate::Verdict`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u16, u16),

    #[error("matrix is rank deficient (rank {rank}, need {needed}); resample")]
    RankDeficient { rank: usize, needed: usize },

    #[error("linear system has no solution")]
    NoSolution,

    #[error("invalid challenge {0}")]
    InvalidChallenge(u8),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resampling budget exhausted: {0}")]
    ResampleExhausted(String),

    #[error("rewind budget of {budget} exceeded in round {round}")]
    RewindBudget { round: usize, budget: u32 },

    #[error("malformed encoding: {0}")]
    Malformed(String),

    #[error("unknown message tag 0x{0:02x}")]
    UnknownTag(u8),

    #[error("truncated frame: declared {declared} bytes, {available} available")]
    Truncated { declared: usize, available: usize },

    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported version {0}")]
    Version(u8),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("timed out waiting for peer")]
    Timeout,

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => Error::Timeout,
            _ => Error::Io(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
