use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate graph is not strongly connected (state {state} unreachable {direction})")]
    NotIrreducible { state: usize, direction: &'static str },

    #[error("negative rate {rate} on arc ({from}, {to})")]
    NegativeRate { from: usize, to: usize, rate: f64 },

    #[error("supplied measure is not stationary: balance residual {residual:.3e} at state {state}")]
    NotStationary { state: usize, residual: f64 },

    #[error("linear system is singular or lost accuracy: {0}")]
    SingularSystem(String),

    #[error("state set must be nonempty")]
    EmptySet,

    #[error("collapse set must be a proper subset of the state space")]
    NotProperSubset,

    #[error("state sets must be disjoint (both contain {0})")]
    SetsIntersect(usize),

    #[error("interior state {0} has non-enumerable exterior neighborhood")]
    NonLocalRates(usize),

    #[error("test function violates boundary constraints: {0}")]
    BadBoundary(String),

    #[error("function vanishes at the distinguished state {0}")]
    ZeroAtX(usize),

    #[error("flow is not supported on the arc set of this graph ({0})")]
    ArcOutsideSupport(String),

    #[error("state sequence is not a cycle: {0}")]
    NotACycle(String),

    #[error("cycle uses the missing arc ({0}, {1})")]
    ArcMissing(usize, usize),

    #[error("flow violates the divergence constraints: {0}")]
    InfeasibleFlow(String),

    #[error("cycle intensity {0} outside (0, 1/3)")]
    BadLambda(f64),

    #[error("symmetric conductance floor must be positive, got {0}")]
    UnboundedBelowY(f64),

    #[error("truncation box {m} exceeds environment half-width {n} - 1")]
    BoxTooLarge { m: i64, n: i64 },

    #[error("trajectory exceeded the step cap {0}; estimates would be biased")]
    StepCapExceeded(usize),

    #[error("invalid simulation config: {0}")]
    BadConfig(String),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("unknown state label {0:?}")]
    UnknownLabel(String),

    #[error("tolerance exceeded: {what} deviates by {dev:.3e} (allowed {allowed:.3e})")]
    ToleranceExceeded { what: String, dev: f64, allowed: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
