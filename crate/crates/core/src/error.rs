use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Fewer pilot tones than channel taps: the inverse transform would fold taps onto each other.
    #[error("aliasing: {pilots} pilot tones cannot resolve {taps} taps")]
    Aliasing { pilots: usize, taps: usize },

    #[error("singular matrix in {context}")]
    Singular { context: &'static str },

    #[error(
        "SDP solver did not converge after {iterations} iterations \
         (stationarity {stationarity:.3e}, relative gap {relative_gap:.3e})"
    )]
    SolverNotConverged {
        iterations: usize,
        stationarity: f64,
        relative_gap: f64,
    },

    #[error("search budget exceeded: {candidates} candidates > {limit}")]
    BudgetExceeded { candidates: u128, limit: u128 },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::Dimension {
                context,
                expected,
                actual,
            })
        }
    }
}
