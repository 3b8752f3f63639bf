use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("{a} is divisible by {p}")]
    DivisibleByPrime { a: i64, p: u64 },
    #[error("logarithm of non-positive rational {0}")]
    NonPositiveLog(String),
    #[error("Hurwitz zeta needs s >= 2 and 0 < a <= 1 (got s={s}, a={a})")]
    HurwitzDomain { s: i64, a: String },
    #[error("division by a ball containing zero")]
    DivisionByZeroBall,
    #[error("square root of a ball with negative lower bound")]
    NegativeSqrt,
    #[error("unsupported constant: {0}")]
    UnsupportedConstant(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid claim `{id}`: {message}")]
    Semantic { id: String, message: String },
    #[error("term index {k} below start index {start}")]
    BelowStart { k: i64, start: i64 },
    #[error("denominator vanishes at k = {k}")]
    DenominatorRoot { k: i64 },
    #[error("cannot certify a tail bound for `{id}`: {reason}")]
    TailBound { id: String, reason: String },
    #[error("prime {p} is not admissible for `{id}`: {reason}")]
    Inadmissible { id: String, p: u64, reason: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("insufficient precision for integer-relation search: {0}")]
    InsufficientPrecision(String),
    #[error("corpus integrity failure: {0}")]
    Corpus(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
