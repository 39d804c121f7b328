use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("beta must lie in (1/2, 1), got {0}")]
    BetaOutOfRange(f64),

    #[error("boundary case (p+1)(2*beta-1) = 1 is excluded (p = {p}, beta = {beta})")]
    BoundaryCase { p: u32, beta: f64 },

    #[error("order p = {p} requires p < 1/(2*beta - 1) = {limit:.6} for beta = {beta}")]
    OrderDomain { p: u32, beta: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation index K = {given} does not meet the tail tolerance; at least K = {required} is required")]
    TruncationTooShort { required: u64, given: u64 },

    #[error("path of n + K = {requested} innovations exceeds the memory budget of {budget}")]
    MemoryBudget { requested: u128, budget: usize },

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("marginal does not provide `{0}`")]
    MissingMarginalQuantity(&'static str),

    #[error("marginal and path are inconsistent: {0}")]
    InconsistentMarginal(String),

    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    #[error("condition `{0}` is not satisfied by the marginal")]
    ConditionUnmet(&'static str),

    #[error("evaluation range is empty: {0}")]
    EmptyRange(String),

    #[error("y = {0} is outside (0, 1]")]
    QuantileDomain(f64),

    #[error("band exponent nu = {nu} violates the admissible row `{row}` (needs nu > {bound})")]
    BandExponent {
        nu: f64,
        row: &'static str,
        bound: f64,
    },

    #[error("trimming l_n = {0} must be below 1/2")]
    OverTrim(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
