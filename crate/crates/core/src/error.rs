use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A value that must be nonnegative (right-hand side, neighbor value) was not.
    #[error("domain error: {what} = {value} must be nonnegative")]
    Domain { what: &'static str, value: f64 },

    #[error("bisection exceeded {cap} iterations without entering the acceptance band (bracket [{lo}, {hi}])")]
    IterationCap { cap: u32, lo: f64, hi: f64 },

    #[error("invalid bisection interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: &'static str },

    /// Wraps an update failure with the multi-index of the node where it happened.
    #[error("update failed at node {index:?}: {source}")]
    Node { index: Vec<usize>, source: Box<Error> },

    #[error("grid mismatch: expected n={expected_n}, m={expected_m}, found n={found_n}, m={found_m}")]
    SpecMismatch { expected_n: usize, expected_m: usize, found_n: usize, found_m: usize },

    #[error("observed order undefined for errors ({prev}, {cur})")]
    UndefinedOrder { prev: f64, cur: f64 },

    #[error("{0} points given, at least two are required")]
    TooFewPoints(usize),

    #[error("length mismatch: {0} labels vs {1} ranks")]
    LengthMismatch(usize, usize),

    #[error("points outside [0,1]^n at indices {0:?}")]
    OutOfDomain(Vec<usize>),

    #[error("unknown test case `{0}` (expected f1, f2, f3 or const:<c>)")]
    UnknownCase(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid study: {0}")]
    InvalidStudy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
