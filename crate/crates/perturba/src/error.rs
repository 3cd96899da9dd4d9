use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants carry enough context (degrees, norms,
/// labels) to diagnose a failure without re-running the computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: {detail}")]
    ShapeMismatch { context: String, detail: String },

    #[error("numeric rank ambiguity: pivot magnitude {magnitude:e} lies in the ambiguous band [{low:e}, {high:e}]")]
    NumericRankAmbiguity { magnitude: f64, low: f64, high: f64 },

    #[error("matrix is singular in {0}")]
    Singular(String),

    #[error("smallness certificate failed: (1 - delta h) not invertible at degree {degree}{}", detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default())]
    NotSmall { degree: i64, detail: Option<String> },

    #[error("lemma relation {relation} violated at degree {degree}: residual {residual}")]
    RelationViolation { relation: String, degree: i64, residual: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("complex is not contractible at degree {degree}: {detail}")]
    NotContractible { degree: i64, detail: String },

    #[error("cohomology nonzero at degree {degree} (dim {dim})")]
    CohomologyNonzero { degree: i64, dim: usize },

    #[error("series diverged: term norms non-decreasing over a window of {window} iterations (last {last:e})")]
    Divergence { window: usize, last: f64 },

    #[error("tolerance miss in {context}: residual {residual:e} exceeds {tol:e}")]
    ToleranceMiss { context: String, residual: f64, tol: f64 },

    #[error("algebraic axiom violated: {0}")]
    AxiomViolation(String),

    #[error("cocycle condition violated: {context} (residual {residual})")]
    NotClosed { context: String, residual: String },

    #[error("trivialization defect {defect:e} exceeds {tol:e} at t = {t}")]
    DefectExceeded { t: f64, defect: f64, tol: f64 },

    #[error("no convergence after {iters} iterations (last residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("arity {arity} out of supported range {max}")]
    ArityViolation { arity: usize, max: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("degree-2 splitting invalid: {0}")]
    SplittingInvalid(String),

    #[error("obstruction class nonzero at order {order}")]
    ObstructionNonzero { order: usize },

    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit-code class for the CLI: 2 for mathematical failures, 1 for
    /// schema / i/o problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } | Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
