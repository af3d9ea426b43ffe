use std::fmt;

use crate::transforms::Interval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input fell outside the domain of a function or bijection.
    #[error("domain error: {value} is outside {interval} ({context})")]
    Domain {
        value: f64,
        interval: Interval,
        context: String,
    },

    /// A generic domain violation without a carried interval.
    #[error("domain error: {0}")]
    InvalidInput(String),

    /// An objective or integrand returned a non-finite value.
    #[error("evaluation error: non-finite value {value} at {at}")]
    Evaluation { at: f64, value: f64 },

    /// A Monte Carlo integrand was non-finite for one particular draw.
    #[error("evaluation error: integrand is {value} for draw #{index} (y = {draw})")]
    NonFiniteDraw { index: usize, draw: f64, value: f64 },

    /// The endpoints of a root-finding bracket do not enclose a sign change.
    #[error("bracketing error: f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign")]
    Bracketing {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// The minimizer of an objective sits on the boundary of the search grid.
    #[error("bracket error: minimizer {at} lies on the edge of [{lo}, {hi}]")]
    BracketEdge { at: f64, lo: f64, hi: f64 },

    /// A constructor received parameters violating its constraints.
    #[error("parameter error for `{name}`: {constraint}")]
    Parameter { name: String, constraint: String },

    /// Text encoding could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Paired inputs differ in length.
    #[error("length mismatch: {left} predictions vs {right} realizations")]
    LengthMismatch { left: usize, right: usize },

    /// An empty data set was supplied.
    #[error("empty data")]
    EmptyData,

    /// A skill score reference makes the denominator vanish.
    #[error("degenerate reference: {0}")]
    DegenerateReference(String),

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Error tagged with the index of the data row that caused it.
    #[error("row {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(value: f64, interval: Interval, context: impl fmt::Display) -> Self {
        Error::Domain {
            value,
            interval,
            context: context.to_string(),
        }
    }

    pub(crate) fn parameter(name: &str, constraint: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Wraps `self` with the data index it was raised for.
    pub fn at_index(self, index: usize) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }

    /// True for failures caused by the numeric content of the data (domain,
    /// evaluation, bracketing), as opposed to malformed input or usage.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Domain { .. }
            | Error::InvalidInput(_)
            | Error::Evaluation { .. }
            | Error::NonFiniteDraw { .. }
            | Error::Bracketing { .. }
            | Error::BracketEdge { .. }
            | Error::DegenerateReference(_) => true,
            Error::AtIndex { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
