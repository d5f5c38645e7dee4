use thiserror::Error;

/// Errors raised by the approximation and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation at pole: x = {x} coincides with -b = {}", -b)]
    PoleHit { x: f64, b: f64 },

    #[error("singular matrix: pivot {pivot:e} at column {column}")]
    Singular { pivot: f64, column: usize },

    #[error("ill-posed least-squares fit: column {column} has |R_kk| = {value:e}")]
    RankDeficient { column: usize, value: f64 },

    #[error(
        "conjugate gradient did not converge after {iterations} iterations \
         (relative residual {residual:e}{})",
        shift_index.map(|i| format!(", shift index {i}")).unwrap_or_default()
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        shift_index: Option<usize>,
    },

    #[error("step-size controller failed: {rejections} consecutive rejections at t = {t}")]
    ControllerFailure { rejections: usize, t: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attach the index of the offending shift to a CG failure.
    pub(crate) fn with_shift_index(self, index: usize) -> Self {
        match self {
            Error::NonConvergence {
                iterations,
                residual,
                ..
            } => Error::NonConvergence {
                iterations,
                residual,
                shift_index: Some(index),
            },
            other => other,
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::PoleHit { .. } => "pole_hit",
            Error::Singular { .. } => "singular_matrix",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ControllerFailure { .. } => "controller_failure",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::Parse { .. } => "parse_error",
            Error::Io(_) => "io_error",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
