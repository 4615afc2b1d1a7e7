use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not a prime greater than 3")]
    InvalidField(u32),

    #[error("q = {q} is not a power of p = {p} greater than 5")]
    InvalidQ { p: u32, q: u64 },

    #[error("division by zero in the prime field")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degree {degree} exceeds the built range (built to {built})")]
    DegreeOverflow { degree: usize, built: usize },

    #[error("component of degree {degree} has dimension {dim}, thin algebras allow at most 2")]
    NotThin { degree: usize, dim: usize },

    #[error("component of degree {degree} is zero")]
    ZeroComponent { degree: usize },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern covers degrees up to {covered}, but degree {needed} was requested")]
    PatternTooShort { needed: usize, covered: usize },

    #[error("validation failed: {check} (first failure in degree {degree})")]
    ValidationFailed { check: String, degree: usize },

    #[error("component of degree {degree} is two-dimensional but has no diamond type")]
    Untypable { degree: usize },

    #[error("invalid centralizer sequence: {0}")]
    InvalidSequence(String),

    #[error("not of maximal class at degree {degree}: {reason}")]
    NotMaximalClass { degree: usize, reason: String },

    #[error("algebra is outside the required class: {0}")]
    NotInClass(String),

    #[error("inconsistent structure: {0}")]
    Inconsistent(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
