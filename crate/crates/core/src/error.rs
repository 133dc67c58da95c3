use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(
        "enumeration budget exceeded: C({n}, {size}) = {count} supports would bring the total to {total}, above the ceiling of {budget}"
    )]
    BudgetExceeded {
        n: usize,
        size: usize,
        count: u128,
        total: u128,
        budget: u64,
    },

    #[error("no feasible support of size <= {k_max} (smallest residual {best_residual:e}, epsilon {epsilon:e})")]
    Infeasible {
        k_max: usize,
        best_residual: f64,
        epsilon: f64,
    },

    #[error("measurements are not in the range of the operator (phase-one residual {residual:e})")]
    InfeasibleEquality { residual: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
