use thiserror::Error;

/// Errors raised while building chains or evaluating functionals on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: requested size {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(
        "detailed balance violated at pair ({x}, {y}): |nu(x)p(x,y) - nu(y)p(y,x)| = {violation:e}"
    )]
    Reversibility { x: usize, y: usize, violation: f64 },

    #[error("transition row {vertex} sums to {row_sum}, expected 1")]
    Stochasticity { vertex: usize, row_sum: f64 },

    #[error("subset is empty")]
    EmptySubset,

    #[error("subset covers the whole vertex set")]
    FullSubset,

    #[error("incompatible lamp model: {0}")]
    IncompatibleModel(String),

    #[error("function vanishes identically")]
    ZeroFunction,

    #[error("Dirichlet energy {energy:e} is degenerate (function is constant on the chain)")]
    DegenerateDirichlet { energy: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { residual: f64, iterations: usize },

    #[error("optimizer value {value} escaped certificate bracket [{lower}, {upper}]")]
    BracketViolation { lower: f64, value: f64, upper: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("hypercube N = {n}: admissible radius {admissible} < 2, test function is empty")]
    InsufficientRadius { n: usize, admissible: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn cap(what: &'static str, requested: u128, cap: u128) -> Self {
        Error::CapExceeded {
            what,
            requested,
            cap,
        }
    }
}
