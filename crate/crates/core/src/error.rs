use thiserror::Error;

use crate::state::ZakharovState;

/// Library-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two fields (or a field and an operator table) live on different grids.
    #[error("grid mismatch: {0} vs {1} modes")]
    GridMismatch(usize, usize),

    /// A quantity that must be real came out with a large imaginary part,
    /// or a similar internal consistency check failed.
    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),

    /// The solution left the representable range (non-finite or huge
    /// coefficients). Carries the last finite state and its model time.
    #[error("blow-up detected at t = {time}")]
    BlowUp {
        time: f64,
        last_state: Box<ZakharovState>,
    },

    /// A fit or scan was requested on data with no usable signal.
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// An iteration exceeded its step budget; partial results may be
    /// available through the operation-specific channel.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A state or data file failed to parse.
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
