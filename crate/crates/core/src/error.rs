use thiserror::Error;

/// Errors surfaced by the library's fallible operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller handed us operands whose shapes do not chain.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A precondition on an argument value was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A Markov chain handed to a distribution routine failed to mix.
    #[error("chain is not ergodic: {0}")]
    NonErgodic(String),

    /// Sampling was requested from a buffer that cannot serve it.
    #[error("replay buffer holds {have} transitions, need {need}")]
    BufferUnderflow { have: usize, need: usize },

    /// A NaN or infinity surfaced during training; carries a diagnostic dump.
    #[error("non-finite value detected in {context}\n{dump}")]
    NonFinite { context: String, dump: String },

    /// Checkpoint or input file is malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub fn dim(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        CoreError::DimMismatch {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
