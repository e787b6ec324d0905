use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A structural function was evaluated outside its domain, e.g. utility
    /// of non-positive money holdings.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// `1/beta - 1 - gamma` (or `1/beta - gamma`) vanishes.
    #[error("singular fiscal configuration: {0}")]
    SingularFiscal(String),

    /// A classification was requested exactly on a knife edge.
    #[error("boundary case: {0}")]
    Boundary(String),

    #[error("root not bracketed on ({lo}, {hi})")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("singular linearization: {0}")]
    SingularLinearization(String),

    #[error("infeasible beliefs in period {period}: {reason}")]
    InfeasibleBeliefs { period: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("training diverged at step {step}: {what} is not finite")]
    TrainingDivergence { step: u64, what: &'static str },

    #[error("checkpoint {path:?}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Boundary(_) | Error::NotBracketed { .. } => 1,
            Error::Domain(_)
            | Error::SingularFiscal(_)
            | Error::SingularLinearization(_)
            | Error::InfeasibleBeliefs { .. }
            | Error::Dimension { .. }
            | Error::TrainingDivergence { .. } => 2,
            Error::Checkpoint { .. } | Error::Io { .. } | Error::Csv(_) => 3,
        }
    }
}
