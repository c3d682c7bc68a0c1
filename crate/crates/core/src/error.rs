use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must be nonempty")]
    EmptyMatrix,

    #[error("matrix is not hermitian: max |M - M*| entry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the supported maximum {max} for this operation")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal mass {off:.3e})")]
    EigenNoConvergence { sweeps: usize, off: f64 },

    #[error("eigenvalue {eigenvalue:.6e} lies outside the domain of {function}")]
    DomainViolation { function: String, eigenvalue: f64 },

    #[error("indeterminate extended-real arithmetic (inf - inf)")]
    IndeterminateArithmetic,

    #[error("non-finite trace encountered where a finite value is required ({context})")]
    NonFiniteTrace { context: String },

    #[error("index set must be nonempty")]
    EmptyIndexSet,

    #[error("index sets must be disjoint")]
    NotDisjoint,

    #[error("off-diagonal entry ({row},{col}) = {value} is positive; not a Z-matrix")]
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("entry ({row},{col}) = {value} is negative; matrix must be entrywise nonnegative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("not an M-matrix: shift s = {s} is below the spectral radius {rho}")]
    NotMMatrix { s: f64, rho: f64 },

    #[error(
        "spectral radius iteration hit the cap ({iterations}); Collatz-Wielandt bracket \
         [{lower:.6e}, {upper:.6e}] did not close (symmetrized-part bound: {symmetric_bound:.6e})"
    )]
    RadiusNoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
        symmetric_bound: f64,
    },

    #[error("series tail bound failed to certify within {terms} terms (last bound {last_bound:.3e}, tolerance {tolerance:.3e})")]
    SeriesNoCertificate {
        terms: usize,
        last_bound: f64,
        tolerance: f64,
    },

    #[error("limit sequence did not settle within {steps} refinements (last difference {last_diff:.3e}, tolerance {tolerance:.3e})")]
    LimitNoConvergence {
        steps: usize,
        last_diff: f64,
        tolerance: f64,
    },

    #[error("matrix is not positive semidefinite: diagonal entry {value:.3e} at index {index}")]
    NotPsd { index: usize, value: f64 },

    #[error("core submatrix is singular (|det| = {det:.3e})")]
    SingularCore { det: f64 },

    #[error("combinatorial budget exceeded: {needed} candidates > cap {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },

    #[error("cardinality mismatch: index set has {set_size} elements but k = {k}")]
    CardinalityMismatch { set_size: usize, k: usize },

    #[error("k = {k} out of range for dimension {dim}")]
    InvalidCardinality { k: usize, dim: usize },

    #[error("counterexample search exhausted for regime {regime} (m = {m})")]
    SearchExhausted { regime: String, m: usize },

    #[error("regime check failed: {detail}")]
    RegimeFailure { detail: String },

    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },

    #[error("parse error at {path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    ClassValidation { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
