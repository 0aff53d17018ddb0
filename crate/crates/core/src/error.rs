use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("exponent q^{k} overflows 64-bit bookkeeping for q = {q}")]
    ExponentOverflow { q: u32, k: usize },

    #[error("magnitude 2^{log2:.3} overflows f64; use the log-scaled evaluator")]
    MagnitudeOverflow { log2: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error(
        "condition {condition} violated at m = {m}{extra}: lhs log2 = {lhs_log2}, rhs log2 = {rhs_log2}"
    )]
    ConditionViolated {
        condition: String,
        m: usize,
        extra: String,
        lhs_log2: f64,
        rhs_log2: f64,
    },

    #[error("lemma lower bound fails at m = {m}: {detail}")]
    LowerBoundViolated { m: usize, detail: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("interval index m = {m} is outside the truncation 1..={terms}")]
    TermAbsent { m: usize, terms: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("Neumann data incompatible: |integral of g| = {integral:e} exceeds {tolerance:e}")]
    Incompatible { integral: f64, tolerance: f64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("wrong boundary condition: {0}")]
    WrongBoundaryCondition(String),

    #[error("cutoff invariant violated: {0}")]
    CutoffInvariant(String),

    #[error("case (M = {terms}, n_theta = {n_theta}, n_r = {n_r}): {source}")]
    Case {
        terms: usize,
        n_theta: usize,
        n_r: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
