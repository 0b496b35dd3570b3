use std::path::PathBuf;

/// Errors raised by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A value outside its admissible domain (unknown category code, probability outside [0, 1], ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller misuse: empty variable subset, self-loop, missing artifact, oversize enumeration.
    #[error("usage error: {0}")]
    Usage(String),

    /// A precondition on a structural argument was violated (e.g. a non-chordal graph
    /// where a decomposable model is required).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A swap plan no longer matches the table it is applied to.
    #[error("conflict: {0}")]
    Conflict(String),

    /// Iterative fitting failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (max discrepancy {discrepancy:e})")]
    Convergence { iterations: usize, discrepancy: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Usage errors map to exit status 2, everything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
