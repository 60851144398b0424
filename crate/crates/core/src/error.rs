use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The CLI maps these onto its stable exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {count} tensor factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("size guard tripped: {0}")]
    Guard(String),

    #[error("not a program: induced map has Choi rank residual {residual:.3e} (tolerance {tol:.1e})")]
    NotAProgram { residual: f64, tol: f64 },

    #[error("optimizer did not converge: {0}")]
    NotConverged(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable process exit code: 2 parse, 3 invariant, 4 guard,
    /// 5 non-convergence (strict mode), 6 precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Json(_) | Error::Io(_) | Error::InvalidArgument(_) => 2,
            Error::DimensionMismatch(_)
            | Error::FactorOutOfRange { .. }
            | Error::Invariant(_)
            | Error::Numerical(_) => 3,
            Error::Guard(_) => 4,
            Error::NotConverged(_) => 5,
            Error::NotAProgram { .. } => 6,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
