use thiserror::Error;

use crate::numerics::Representation;

/// Errors raised by grid construction, state builders, and the protocols.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),

    #[error("empty domain: x_max ({x_max}) must exceed x_min ({x_min})")]
    EmptyDomain { x_min: f64, x_max: f64 },

    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("{what} is under-resolved: width {width} needs at least {required} on a grid with dx = {dx}")]
    UnderResolved {
        what: &'static str,
        width: f64,
        required: f64,
        dx: f64,
    },

    #[error("boundary density {density:e} exceeds {limit:e}; widen the domain to avoid wraparound")]
    BoundaryOverflow { density: f64, limit: f64 },

    #[error("field is in {actual:?} representation, expected {expected:?}")]
    Representation {
        expected: Representation,
        actual: Representation,
    },

    #[error("field is not normalized: squared norm {0}")]
    Unnormalized(f64),

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("detection probability {0:e} is too small to condition on")]
    NoDetection(f64),

    #[error("peaks overlap: spacing {spacing} < 6 * peak_sigma ({peak_sigma})")]
    OverlappingPeaks { spacing: f64, peak_sigma: f64 },

    #[error("quadrature did not converge to {tolerance:e} on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64, tolerance: f64 },

    #[error("correlation {0} lies outside [-1, 1]")]
    CorrelationRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must be positive and finite",
        })
    }
}
