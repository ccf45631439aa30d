use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature failure: estimate {partial:e} with error {error:e} after {intervals} intervals"
    )]
    Quadrature {
        partial: f64,
        error: f64,
        intervals: usize,
    },

    /// The objective returned NaN.
    #[error("evaluation failure: objective is NaN at {at}")]
    Evaluation { at: f64 },

    #[error("grid too large: {cells:e} cells exceeds the cap of {cap}; reduce R·T or use exact_mary_error")]
    GridTooLarge { cells: f64, cap: u64 },

    #[error("all power bins filtered: no bin holds at least a {cutoff:e} share of the profile")]
    AllBinsFiltered { cutoff: f64 },

    #[error("convexity violated above threshold: mixture {mixture:e} < convexified {convexified:e} at T = {duration}")]
    ConvexityViolated {
        mixture: f64,
        convexified: f64,
        duration: f64,
    },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
