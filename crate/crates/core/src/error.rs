use alloc::string::String;

/// Errors raised by the coverage library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two sensors closer than the coincidence tolerance.
    #[error("sensors {first} and {second} coincide (distance {distance:e})")]
    CoincidentSensors {
        first: usize,
        second: usize,
        distance: f64,
    },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cost arity {cost} does not match partition order {order}")]
    ArityMismatch { cost: usize, order: usize },
    #[error("cost function rejected: {0}")]
    CostRejected(String),
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
