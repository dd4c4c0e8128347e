use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("measure is not integrable: a = {a}, b = {b} (both exponents must exceed -1)")]
    NotIntegrable { a: f64, b: f64 },

    #[error("weight factor d(v) is not strictly positive: d({v}) = {value}")]
    NonPositiveWeight { v: f64, value: f64 },

    #[error("quadrature did not converge: last two estimates {prev} and {last}")]
    QuadratureNoConvergence { prev: f64, last: f64 },

    #[error("fixed-point solver exhausted its budget: best residual {residual:.3e} at m = {best}")]
    SolverNoConvergence { best: Complex64, residual: f64 },

    #[error("edge integral diverges: {side} edge needs exponent > 1, got {exponent}")]
    DivergentIntegral { side: &'static str, exponent: f64 },

    #[error("coupling {lambda} is within 1e-9 of the critical value {lambda_crit}; regime undefined")]
    CriticalCoupling { lambda: f64, lambda_crit: f64 },

    #[error("no subcritical edge: (1/N) sum 1/(lambda v_i - lambda)^2 = {sum} <= 1")]
    NoSubcriticalEdge { sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("potential values must be sorted descending (violated at index {index})")]
    OrderingViolated { index: usize },

    #[error("eigenvalue iteration exceeded 50 QL sweeps at index {index}")]
    EigenNoConvergence { index: usize },

    #[error("no sign change in the search bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("every grid point was discarded by the domain separation condition")]
    EmptyDomain,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} trials failed (> 1% budget); first failure: {first}")]
    TrialBudgetExceeded {
        failed: usize,
        total: usize,
        first: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
