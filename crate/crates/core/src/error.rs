use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The active-set Gram matrix became numerically singular during a LARS step.
    #[error("degenerate design: Gram matrix of active set {active:?} is numerically singular")]
    DegenerateDesign { active: Vec<usize> },

    #[error("rank-deficient submatrix for model {set:?} (singular value ratio {ratio:.3e})")]
    RankDeficient { set: Vec<usize>, ratio: f64 },

    #[error("no convergence after {iterations} iterations (final residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("LP iteration limit {iterations} reached (objective {objective:.6e}, infeasibility {gap:.3e})")]
    LpIterationLimit {
        iterations: usize,
        objective: f64,
        gap: f64,
    },

    #[error("enumeration of {required} subsets exceeds budget {budget}; use sampled mode")]
    Budget { required: u128, budget: u128 },

    #[error("constants undefined in this regime: {0}")]
    InvalidRegime(String),

    #[error("initial estimator has no nonzero coefficient")]
    EmptyModel,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("report precision: {0}")]
    Precision(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used in harness records and CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegenerateDesign { .. } => "degenerate_design",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NonConvergence { .. } => "non_convergence",
            Error::LpIterationLimit { .. } => "lp_iteration_limit",
            Error::Budget { .. } => "budget",
            Error::InvalidRegime(_) => "invalid_regime",
            Error::EmptyModel => "empty_model",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Precision(_) => "precision",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Internal(_) => "internal",
        }
    }
}
