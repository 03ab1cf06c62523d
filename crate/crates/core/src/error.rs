use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator set is rank deficient (smallest/largest singular value {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid anchor cone: {0}")]
    InvalidAnchor(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("subset enumeration budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("delta ladder did not stabilize: {values:?}")]
    Unstable { values: Vec<i64> },

    #[error("degeneracy budget exceeded: {degenerate} degenerate draws for {samples} samples")]
    DegeneracyBudgetExceeded { degenerate: u64, samples: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scene schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported scene for {law}: {reason}")]
    UnsupportedScene { law: String, reason: String },

    /// A construction error located inside a scene document.
    #[error("at {path}: {source}")]
    At { path: String, source: Box<Error> },
}

impl Error {
    /// Errors that a Monte Carlo driver may absorb by redrawing the sample.
    pub fn is_resamplable(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSample(_) | Error::NumericalFailure(_) | Error::Unstable { .. }
        )
    }

    /// Attaches a JSON path, merging with any path already present.
    pub fn at(self, path: &str) -> Error {
        let join = |p: String| {
            if p.is_empty() {
                path.to_string()
            } else if p.starts_with('[') {
                format!("{path}{p}")
            } else {
                format!("{path}.{p}")
            }
        };
        match self {
            Error::Schema { path: p, message } => Error::Schema { path: join(p), message },
            Error::At { path: p, source } => Error::At { path: join(p), source },
            other => Error::At { path: path.to_string(), source: Box::new(other) },
        }
    }

    /// Process exit code: 2 usage or scene, 3 degeneracy, 4 budget.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::DegenerateSample(_)
            | Error::DegeneracyBudgetExceeded { .. }
            | Error::NumericalFailure(_)
            | Error::Unstable { .. } => 3,
            Error::BudgetExceeded { .. } => 4,
            _ => 2,
        }
    }

    /// The error with location wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }

    /// JSON path of a located error.
    pub fn path(&self) -> Option<&str> {
        match self {
            Error::At { path, .. } | Error::Schema { path, .. } => Some(path),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
