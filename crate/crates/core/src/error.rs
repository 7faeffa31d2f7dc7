use thiserror::Error;

/// Errors raised across code construction, decoding, control and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("code length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("invalid code parameters: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("flip index {0} is frozen or out of range")]
    InvalidFlip(usize),

    #[error("invalid decoder configuration: {0}")]
    InvalidDecoder(String),

    #[error("malformed thresholds: {0}")]
    InvalidThresholds(String),

    #[error("production coefficient {upsilon} is infeasible: T_av(1) = 1 is not below it")]
    RateInfeasible { upsilon: String },

    #[error("invalid timing: {0}")]
    InvalidTiming(String),

    #[error("buffer overflow at time unit {time_unit} while storing word {word}")]
    BufferOverflow { time_unit: u64, word: usize },

    #[error("buffer underflow")]
    BufferUnderflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
