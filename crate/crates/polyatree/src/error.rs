use thiserror::Error;

/// Failure modes surfaced by the library.
///
/// `DegenerateData` and `NoConvergence` are kept distinct from the generic
/// input errors because callers (the CLI in particular) map them to
/// different exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error(
        "quadrature failed to converge: best estimate {estimate}, \
         error bound {error_bound} after {evaluations} evaluations"
    )]
    NoConvergence {
        estimate: f64,
        error_bound: f64,
        evaluations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
