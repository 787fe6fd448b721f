use thiserror::Error;

/// Errors raised by the estimation, interval and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {abs_error:e} after {intervals} subintervals")]
    Quadrature {
        estimate: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("zero variance at theta = {theta}")]
    ZeroVariance { theta: f64 },

    #[error("derivative failure at theta = {theta}: {reason}")]
    Derivative { theta: f64, reason: String },

    #[error("orientation error at theta = {theta}: E(g score) = {covariance:e} < 0, negate the statistic")]
    Orientation { theta: f64, covariance: f64 },

    #[error("statistic is biased at theta = {theta}: E u - theta = {bias:e}")]
    Biased { theta: f64, bias: f64 },

    #[error("nonpositive curvature at theta = {theta}: observed information {info:e}")]
    NonPositiveCurvature { theta: f64, info: f64 },

    #[error("interval endpoint does not exist: {0}")]
    Nonexistence(String),

    #[error("estimator is not monotone over the search bracket: {0}")]
    NonMonotone(String),

    #[error("bracket expansion failed after {doublings} doublings")]
    BracketExpansion { doublings: u32 },

    #[error("monte carlo budget of {draws} draws exhausted with standard error {std_error:e}")]
    McBudget { draws: usize, std_error: f64 },

    #[error("simulation aborted: {failures} of {reps} replicates failed")]
    SimulationAborted { failures: usize, reps: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
