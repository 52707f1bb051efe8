use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("incompatible extension: sqrt({0}) and sqrt({1}) cannot be combined")]
    IncompatibleExtension(i64, i64),
    #[error("bound overflow: tower exponent {exponent} exceeds cap {cap}")]
    BoundOverflow { exponent: String, cap: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: index out of range (x{index} with {arity} variables)")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        arity: usize,
    },
    #[error("variable degree zero violates standing assumption (x{0} does not occur)")]
    DegreeZero(usize),
    #[error("coarse construction too large: {count} variables exceed cap {cap}")]
    CoarseTooLarge { count: String, cap: u64 },
    #[error("internal accounting mismatch: {0}")]
    Accounting(String),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix")]
    Singular,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("system is not zero-dimensional")]
    NotZeroDimensional,
    #[error("degenerate triangular form")]
    DegenerateTriangular,
    #[error("refinement exhausted")]
    RefinementExhausted,
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    #[error("multiplication equation present in an additive-only operation")]
    MulPresent,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-coprime moduli with inconsistent residues")]
    CrtInconsistent,
    #[error("{0} is a perfect square")]
    PerfectSquare(String),
    #[error("point ({0}, {1}) is not in T")]
    NotInT(String, String),
    #[error("point ({0}, {1}) lies in T")]
    InT(String, String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = CanonError> = std::result::Result<T, E>;
