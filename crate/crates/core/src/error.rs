use thiserror::Error;

/// Errors produced by the solver and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated an operation precondition (dimension mismatch, bad argument).
    #[error("usage error: {0}")]
    Usage(String),
    /// Request exceeds the dense-realization limits.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unsupported function: {0}")]
    UnsupportedFunction(String),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    /// A QITE step could not be completed.
    #[error("step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },
    /// The ground-state overlap of the current state is too small to divide by.
    #[error("ground-state overlap {overlap:e} too small; norm correction unavailable")]
    CorrectionUnavailable { overlap: f64 },
    #[error("norm ratio undefined for C_f = {0}")]
    UndefinedRatio(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Invalid run configuration; one diagnostic per offending field or line.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepFailure { .. }
            | Error::Numerical(_)
            | Error::CorrectionUnavailable { .. }
            | Error::UndefinedRatio(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
