use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element {element} does not belong to backend {backend}")]
    BackendMismatch { backend: String, element: String },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("state cap {cap} exceeded after {reached} states")]
    CapExceeded { cap: usize, reached: usize },
    #[error("generators do not generate a nilpotent group within commutator depth {depth}")]
    NotNilpotent { depth: usize },
    #[error("element is not unitriangular: {0}")]
    NotUnitriangular(String),
    #[error("generator logarithms are linearly dependent (kernel vector {certificate:?})")]
    DependentGenerators { certificate: Vec<String> },
    #[error("word {word} does not lie in the span of the generator logarithms")]
    NotInSpan { word: String },
    #[error("measure is not symmetric at {0}")]
    NotSymmetric(String),
    #[error("operation requires an abelian group")]
    NotAbelian,
    #[error("mass representations differ (exact vs float)")]
    ModeMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("index {0} missing from series")]
    MissingIndex(u64),
    #[error("stochastic matrix is numerically defective (condition estimate {condition:e})")]
    DefectiveChain { condition: f64 },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
