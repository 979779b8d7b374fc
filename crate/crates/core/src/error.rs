use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("arm norm {norm} exceeds 1 + {tol}")]
    ArmOutsideBall { norm: f64, tol: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("inner arm subset is empty")]
    EmptyInnerSet,

    #[error("exploration kernel infeasible: {0}")]
    KernelInfeasible(String),

    #[error("policy `{policy}` cannot run on arm set `{arm_set}`: {reason}")]
    Incompatible {
        policy: String,
        arm_set: String,
        reason: String,
    },

    #[error("theorem hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("numerical diagnostic: {0}")]
    Numerical(String),

    #[error("catalog row {row}: {reason}")]
    CatalogRow { row: usize, reason: String },

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
