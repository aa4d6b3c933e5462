use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be nonzero")]
    ZeroModulus,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("form system is not primitive: {0}")]
    NotPrimitive(String),
    #[error("enumeration of {size} residue vectors exceeds the cap {cap}; {hint}")]
    EnumerationCap { size: f64, cap: f64, hint: String },
    #[error("box is not ({a}, {b})-appropriate: x_- = {x_minus} but the threshold is {threshold}")]
    InappropriateBox {
        a: f64,
        b: f64,
        x_minus: f64,
        threshold: f64,
    },
    #[error("y = {y} must satisfy max q_j = {q_max} < y <= X = {x}")]
    YOutOfRange { y: f64, q_max: u64, x: f64 },
    #[error("a-sum truncation failed: tail mass {tail:e} after {terms} vectors (cap {cap})")]
    TruncationFailure { tail: f64, terms: usize, cap: usize },
    #[error("local average at p = {p} did not converge: unresolved mass {missing:e}")]
    NoConvergence { p: u64, missing: f64 },
    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },
    #[error("range {need} exceeds the sieve limit {limit}")]
    RangeOverflow { need: u64, limit: u64 },
    #[error("unknown function name `{0}`")]
    UnknownFunction(String),
    #[error("cannot parse form system `{input}`: {reason}")]
    Grammar { input: String, reason: String },
    #[error("method `{method}` does not support k = {k}")]
    MethodMismatch { method: String, k: usize },
    #[error("provenance mismatch: {0}")]
    Provenance(String),
    #[error("singular curve parameter lambda = {0}")]
    SingularCurve(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
