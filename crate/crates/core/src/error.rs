use thiserror::Error;

use crate::complex::Space;
use crate::field::Point;

/// Errors produced by the field, tensor, complex and spacetime layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular point {point}: {reason}")]
    SingularPoint { point: Point, reason: String },

    #[error("expression contains a formal primitive and cannot be evaluated")]
    Unevaluable,

    #[error("no exact normal form and no shared non-singular sample domain")]
    IncomparableBackends,

    #[error("field is not polynomial")]
    NonPolynomial,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("quotient by the zero expression")]
    ZeroDenominator,

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("invalid index positions: {0}")]
    InvalidPositions(String),

    #[error("not a member of {space}: {check} fails at index {index:?} (residual {residual:e})")]
    InvalidMember {
        space: Space,
        check: String,
        index: Vec<usize>,
        residual: f64,
    },

    #[error("expected an element of {expected}, found {found}")]
    WrongSpace {
        expected: &'static str,
        found: Space,
    },

    #[error("form is not closed: d(omega) nonzero at index {index:?} (residual {residual:e})")]
    NotClosed { index: Vec<usize>, residual: f64 },

    #[error("form is not skew in its leading {slots} slots at index {index:?}")]
    NotSkew { slots: usize, index: Vec<usize> },

    #[error("connection is not symmetric in its last two indices at {index:?}")]
    NotConnectionShaped { index: Vec<usize> },

    #[error("metric is singular at {point}")]
    SingularMetric { point: Point },

    #[error("bad parameter: {0}")]
    BadParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
