use thiserror::Error;

/// Library-wide error type.
///
/// Verification routines distinguish malformed input (an `Error`) from a
/// well-formed object that fails its checks (a report with witnesses), so
/// only the former shows up here.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arithmetic overflow during {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("modulus must be nonnegative, got {0}")]
    BadModulus(i64),

    #[error("{0} is not an odd prime")]
    NotPrime(i64),

    #[error("prime {0} outside the supported range 3..=10000")]
    PrimeOutOfRange(i64),

    #[error("singular curve over F_{p}: a={a}, b={b}")]
    SingularCurve { a: i64, b: i64, p: i64 },

    #[error("points lie on different curves")]
    MismatchedCurves,

    #[error("field too large for exhaustive curve enumeration: p={0}")]
    FieldTooLarge(i64),

    #[error("torsion basis unavailable: {0}")]
    TorsionUnavailable(String),

    #[error("point is not killed by n={n}")]
    NotTorsion { n: u64 },

    #[error("mu_{n} is not rational over F_{p}")]
    RootsOfUnityMissing { n: u64, p: i64 },

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("enumeration of size {size} exceeds the limit {limit}; set MOTIVECALC_MAX_ENUM to raise it")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("invalid motive data: {0}")]
    InvalidMotive(String),

    #[error("invalid biextension data: {0}")]
    InvalidBiextension(String),

    #[error("invalid morphism data: {0}")]
    InvalidMorphism(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
