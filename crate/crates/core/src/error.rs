use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("relation name must be non-empty")]
    EmptyRelationName,
    #[error("relation {0} has arity 0; arities must be at least 1")]
    ZeroArity(String),
    #[error("duplicate relation name {0}")]
    DuplicateRelation(String),
    #[error("universe must be non-empty")]
    EmptyUniverse,
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("relation {0} is not declared in the signature")]
    UnknownRelation(String),
    #[error("arity mismatch: relation {relation} has arity {expected} but a tuple has length {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("duplicate tuple in relation {0}")]
    DuplicateTuple(String),
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("cap exceeded: {required} plays required but the cap is {cap}")]
    CapExceeded { required: u128, cap: usize },
    #[error("arity violation: relation {relation} has arity {arity} but modal structures allow at most 2")]
    ArityViolation { relation: String, arity: usize },
    #[error("structure has no point")]
    MissingPoint,
    #[error("resource bound must be at least 1")]
    ZeroBound,
    #[error("size bound exceeded: {size} elements but the limit is {limit}")]
    BoundExceeded { size: usize, limit: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("forest height {height} exceeds k = {k}")]
    HeightExceeded { height: usize, k: usize },
    #[error("decomposition width {width} is not below k = {k}")]
    WidthTooLarge { width: usize, k: usize },
    #[error("strategy undefined on prefix {0}")]
    UndefinedPrefix(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invalid coalgebra: {0}")]
    InvalidCoalgebra(String),
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
