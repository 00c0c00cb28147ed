use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("size bound {requested} exceeds the explicit age bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },
    #[error("tuple is not realized in the age: {0}")]
    TupleNotInAge(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("imaginaries belong to different sorts")]
    SortMismatch,
    #[error("subgroup family is empty: {0}")]
    EmptyFamily(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
