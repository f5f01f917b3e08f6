//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
///
/// Variants are grouped by failure class so a front end can map them onto
/// exit codes: input/validation problems, numerical non-convergence, and
/// internal-consistency failures (things that indicate a bug or a violated
/// structural guarantee rather than bad input).
#[derive(Error, Debug)]
pub enum Error {
    #[error("coefficient vector length {got} does not match algebra dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unbound atom `{0}` in numeric evaluation")]
    UnboundAtom(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("model validation failed: {0}")]
    Model(String),

    #[error("matrix {index} is not Hermitian to tolerance ({deviation:.3e})")]
    NotHermitian { index: usize, deviation: f64 },

    #[error("generators are linearly dependent: {detail}")]
    DependentGenerators { detail: String },

    #[error("validity violation: {0}")]
    ValidityViolation(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("missing matrix representation on the algebra")]
    MissingRep,

    #[error("missing numeric binding for `{0}`")]
    MissingBinding(String),

    #[error("divergent limit: {0}")]
    Divergent(String),

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("matrix-log branch ambiguity: eigenphase {phase:.9} within {margin:.1e} of ±pi")]
    BranchAmbiguity { phase: f64, margin: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code a CLI should use for this error.
    ///
    /// 2 = validation, 3 = numerical non-convergence, 4 = internal
    /// consistency (divergent limits, violated structural guarantees).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LengthMismatch { .. }
            | Error::UnboundAtom(_)
            | Error::Parse { .. }
            | Error::Model(_)
            | Error::NotHermitian { .. }
            | Error::DependentGenerators { .. }
            | Error::ValidityViolation(_)
            | Error::NotImplemented(_)
            | Error::MissingRep
            | Error::MissingBinding(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::NonConvergence(_) | Error::BranchAmbiguity { .. } => 3,
            Error::Divergent(_) | Error::InternalConsistency(_) => 4,
        }
    }
}
