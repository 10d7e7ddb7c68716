use std::fmt;

use thiserror::Error;

/// Coordinate of a bivariate observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid summary: {0}")]
    InvalidSummary(String),

    #[error("refined bounds not nested in worst-case bounds: {0}")]
    NestingViolation(String),

    #[error("incoherent interval [{lower}, {upper}] does not meet [-1, 1]")]
    Incoherent { lower: f64, upper: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("tied {axis} values at {value}; concordance needs continuous data")]
    Tie { axis: Axis, value: f64 },

    #[error("quadrature did not converge: error estimate {error:e} exceeds {tolerance:e} after {intervals} subintervals")]
    NoConvergence {
        error: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("{axis} = {value} outside CDF table support [{lo}, {hi}]")]
    OutOfSupport {
        axis: Axis,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid CDF table: {0}")]
    InvalidTable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "[0, 1]",
        })
    }
}
