use thiserror::Error;

use crate::regress::IterRecord;
use crate::spectral::SpectralCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    Width {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("no samples")]
    NoSamples,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate truncation: every sample exceeds the norm threshold")]
    DegenerateTruncation,

    #[error("stage 1 truncation kept {survivors} of {n1} samples (need at least {required})")]
    Stage1Shortfall {
        n1: usize,
        survivors: usize,
        required: usize,
    },

    #[error("eigenvalue iteration did not converge after {matvecs} products (best lambda {})", best.lambda)]
    NoConvergence {
        matvecs: usize,
        best: Box<SpectralCertificate>,
    },

    #[error("iterate became non-finite at step {iteration}")]
    Diverged {
        iteration: usize,
        trace: Vec<IterRecord>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
