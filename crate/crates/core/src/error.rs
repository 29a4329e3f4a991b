use thiserror::Error;

/// Failures raised by the solvers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("taxis function has no +/- sign change in (0, 1] for chi = {chi}")]
    NoTaxisRoot { chi: f64 },

    #[error("critical intensity {gc} is not reachable with chi in [-1.1, 1.1]")]
    CriticalIntensityOutOfRange { gc: f64 },

    #[error("shooting bracket [{lo}, {hi}] does not enclose the normalization constraint")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("no root of {what} in ({lo}, {hi}]")]
    NoRoot { what: &'static str, lo: f64, hi: f64 },

    #[error("x3 = {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("solution basis overflowed near x3 = {x3}; re-orthonormalize more often")]
    IntegrationOverflow { x3: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("boundary matrix is not rank deficient (sigma_min / sigma_max = {ratio:e})")]
    NotRankDeficient { ratio: f64 },

    #[error("every neutral branch is empty")]
    EmptyBranches,

    #[error("all {seeds} growth-rate seeds diverged")]
    SeedsDiverged { seeds: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
