//! Scalar functions on flat coordinate space.
//!
//! Two backends live here: sparse multivariate [`Polynomial`]s, which are
//! exact and closed under sums, products and partial derivatives, and the
//! [`Expr`] tree used for metric data involving reciprocals, square roots and
//! logarithms. [`ScalarField`] wraps either one and is what tensors hold.

pub mod expr;
pub mod polynomial;
pub mod scalar;

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

pub use expr::Expr;
pub use polynomial::Polynomial;
pub use scalar::{ScalarField, ScalarFunction, ZeroCheck};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Build a rational from a machine-size numerator and denominator.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Coefficient ring for [`Polynomial`].
///
/// `EXACT` coefficients compare to zero structurally; inexact ones (the
/// float impls) use the tolerance of the active equality policy.
pub trait Coefficient:
    Clone + fmt::Debug + fmt::Display + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn magnitude(&self) -> f64;
}

impl Coefficient for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        rational(num, den)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Coefficient for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn magnitude(&self) -> f64 {
        f64::from(self.abs())
    }
}

/// A point of coordinate space with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| integer(c)).collect())
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Coordinates as strings, for reports.
    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.labels().join(", "))
    }
}

/// Result of evaluating a field at a point: exact whenever every operation
/// on the way stayed inside the rationals.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) => write!(f, "{x:e}"),
        }
    }
}

/// Relative residual `|a - b| / max(1, |a|, |b|)`; exact when both sides are.
pub fn relative_residual(a: &Value, b: &Value) -> f64 {
    if let (Value::Exact(x), Value::Exact(y)) = (a, b) {
        if x == y {
            return 0.0;
        }
    }
    let (x, y) = (a.to_f64(), b.to_f64());
    let scale = 1f64.max(x.abs()).max(y.abs());
    (x - y).abs() / scale
}
