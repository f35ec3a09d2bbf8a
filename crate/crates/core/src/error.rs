use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("truncation error: level {level} needs n_max >= {needed}, have {n_max}")]
    Truncation { level: usize, needed: usize, n_max: usize },
    #[error("memory guard: {0}")]
    MemoryGuard(String),
    #[error("boundary leak {leak:.3e} exceeds {threshold:.1e} at t = {time}")]
    BoundaryLeak { leak: f64, threshold: f64, time: f64 },
    #[error("no oscillation detected")]
    NoOscillation,
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("non-compact field: {0}")]
    NonCompact(String),
}

impl Error {
    /// True for failures raised by runtime numerical guards (as opposed to
    /// bad input).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::BoundaryLeak { .. }
                | Error::NoOscillation
                | Error::Inconclusive(_)
                | Error::NonCompact(_)
                | Error::MemoryGuard(_)
        )
    }
}
