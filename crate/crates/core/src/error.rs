use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A root finder ran out of iterations; carries the last bracket.
    #[error("solver did not converge after {iterations} iterations, last bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    /// The integrated state left the region where the model is defined.
    #[error("integration halted at t = {t}: {reason}")]
    IntegrationHalted { t: f64, reason: String },

    /// A delayed lookup fell outside the stored history. Always a bug.
    #[error("history query at t = {t} outside buffer [{oldest}, {newest}]")]
    HistoryOutOfRange { t: f64, oldest: f64, newest: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::IntegrationHalted { .. } | Error::HistoryOutOfRange { .. }
        )
    }
}
