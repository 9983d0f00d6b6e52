use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: &'static str, message: String },

    #[error("{0}")]
    Precondition(String),

    #[error("state space too large: {states} states exceed the limit of {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },

    #[error("p = {0} is not prime")]
    NotPrime(u64),

    #[error("no plane constructed: order {0} is not a prime power")]
    NoPlane(u64),

    #[error("inverse of zero in GF({0})")]
    InverseOfZero(u64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("recourse action `{action}` does not conform for product `{product}`: {message}")]
    NonConformingRecourse {
        action: String,
        product: String,
        message: String,
    },

    #[error("inventory underflow on item `{0}`")]
    InventoryUnderflow(String),

    #[error("no sign change for root bracket: {0}")]
    NoSignChange(String),

    #[error("residual check failed: {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}
