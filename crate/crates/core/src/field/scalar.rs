use std::fmt;

use super::{relative_residual, Coefficient, Expr, Point, Polynomial, Rational, Value};
use crate::error::{Error, Result};
use crate::policy::EqualityPolicy;

/// Outcome of testing a field against zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCheck {
    pub zero: bool,
    pub residual: f64,
    pub witness: Option<Point>,
}

impl ZeroCheck {
    pub fn exact_zero() -> Self {
        ZeroCheck {
            zero: true,
            residual: 0.0,
            witness: None,
        }
    }
}

/// What a tensor entry has to support: the module operations over the
/// coefficient field, partial differentiation, and a zero test.
pub trait ScalarFunction: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero(dim: usize) -> Self;

    /// The constant `num / den`.
    fn from_ratio(dim: usize, num: i64, den: i64) -> Self;

    fn dim(&self) -> usize;

    /// Cheap structural test; `false` does not imply nonzero.
    fn is_structurally_zero(&self) -> bool;

    fn plus(&self, other: &Self) -> Self;

    fn minus(&self, other: &Self) -> Self;

    fn negated(&self) -> Self;

    fn times(&self, other: &Self) -> Self;

    fn scaled(&self, num: i64, den: i64) -> Self;

    fn partial(&self, axis: usize) -> Self;

    fn zero_check(&self, policy: &EqualityPolicy) -> Result<ZeroCheck>;
}

impl<C: Coefficient> ScalarFunction for Polynomial<C> {
    fn zero(dim: usize) -> Self {
        Polynomial::zero(dim)
    }

    fn from_ratio(dim: usize, num: i64, den: i64) -> Self {
        Polynomial::constant(dim, C::from_ratio(num, den))
    }

    fn dim(&self) -> usize {
        Polynomial::dim(self)
    }

    fn is_structurally_zero(&self) -> bool {
        self.is_zero()
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn minus(&self, other: &Self) -> Self {
        self - other
    }

    fn negated(&self) -> Self {
        -self
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn scaled(&self, num: i64, den: i64) -> Self {
        self.scale(&C::from_ratio(num, den))
    }

    fn partial(&self, axis: usize) -> Self {
        self.differentiate(axis)
    }

    fn zero_check(&self, policy: &EqualityPolicy) -> Result<ZeroCheck> {
        if self.is_zero() {
            return Ok(ZeroCheck::exact_zero());
        }
        let largest = self.terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max);
        if !C::EXACT && largest <= policy.tol {
            return Ok(ZeroCheck {
                zero: true,
                residual: largest,
                witness: None,
            });
        }
        // Nonzero: find the sample point where it is largest, as a witness.
        let mut residual = 0.0;
        let mut witness = None;
        for p in policy.sample_points(self.dim(), |_| true)? {
            let coords: Vec<C> = p.coords().iter().map(C::from_rational).collect();
            let v = self.evaluate(&coords).magnitude();
            if v > residual || witness.is_none() {
                residual = v;
                witness = Some(p);
            }
        }
        if residual == 0.0 {
            residual = largest;
        }
        Ok(ZeroCheck {
            zero: false,
            residual,
            witness,
        })
    }
}

/// A smooth function on `dim`-dimensional coordinate space, backed either
/// by an exact polynomial or by an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Poly(Polynomial<Rational>),
    Expr { expr: Expr, dim: usize },
}

impl ScalarField {
    pub fn from_poly(p: Polynomial<Rational>) -> Self {
        ScalarField::Poly(p)
    }

    /// Wrap an expression, normalizing to the polynomial backend when the
    /// expression is polynomial.
    pub fn from_expr(expr: Expr, dim: usize) -> Result<Self> {
        if let Some(&axis) = expr.coordinates().iter().next_back() {
            if axis >= dim {
                return Err(Error::AxisOutOfRange { axis, dim });
            }
        }
        Ok(match expr.to_polynomial(dim) {
            Some(p) => ScalarField::Poly(p),
            None => ScalarField::Expr { expr, dim },
        })
    }

    /// Wrap an expression without attempting polynomial normalization.
    pub fn expr(expr: Expr, dim: usize) -> Self {
        ScalarField::Expr { expr, dim }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        ScalarField::Poly(Polynomial::constant(dim, c))
    }

    pub fn coordinate(dim: usize, axis: usize) -> Self {
        ScalarField::Poly(Polynomial::coordinate(dim, axis))
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, ScalarField::Poly(_))
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial<Rational>> {
        match self {
            ScalarField::Poly(p) => Some(p),
            ScalarField::Expr { .. } => None,
        }
    }

    /// Polynomial form, converting expression backends when possible.
    pub fn to_polynomial(&self) -> Result<Polynomial<Rational>> {
        match self {
            ScalarField::Poly(p) => Ok(p.clone()),
            ScalarField::Expr { expr, dim } => expr.to_polynomial(*dim).ok_or(Error::NonPolynomial),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            ScalarField::Poly(p) => p.to_expr(),
            ScalarField::Expr { expr, .. } => expr.clone(),
        }
    }

    pub fn differentiate(&self, axis: usize) -> Result<Self> {
        let dim = ScalarFunction::dim(self);
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        Ok(self.partial(axis))
    }

    pub fn evaluate(&self, point: &Point) -> Result<Value> {
        let dim = ScalarFunction::dim(self);
        if point.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: point.dim(),
            });
        }
        match self {
            ScalarField::Poly(p) => Ok(Value::Exact(p.evaluate(point.coords()))),
            ScalarField::Expr { expr, .. } => expr.evaluate(point),
        }
    }

    /// Compare two fields. Polynomial forms compare exactly; otherwise both
    /// sides are evaluated at the policy's seeded sample points (points where
    /// either side is singular are skipped) and the worst relative residual is
    /// reported.
    pub fn compare(&self, other: &ScalarField, policy: &EqualityPolicy) -> Result<ZeroCheck> {
        let dim = ScalarFunction::dim(self);
        if ScalarFunction::dim(other) != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: ScalarFunction::dim(other),
            });
        }
        if let (Ok(a), Ok(b)) = (self.to_polynomial(), other.to_polynomial()) {
            return (&a - &b).zero_check(policy);
        }
        let mut residual: f64 = 0.0;
        let mut witness = None;
        let mut found = 0;
        let attempts = policy.sample_count * 64;
        for p in policy.candidate_points(dim)?.take(attempts) {
            let (a, b) = match (self.evaluate(&p), other.evaluate(&p)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::SingularPoint { .. }), _) | (_, Err(Error::SingularPoint { .. })) => {
                    continue
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let r = relative_residual(&a, &b);
            if r > residual || witness.is_none() {
                residual = r;
                witness = Some(p);
            }
            found += 1;
            if found == policy.sample_count {
                break;
            }
        }
        if found < policy.sample_count {
            return Err(Error::IncomparableBackends);
        }
        Ok(ZeroCheck {
            zero: residual <= policy.tol,
            residual,
            witness,
        })
    }

    pub fn equals(&self, other: &ScalarField, policy: &EqualityPolicy) -> Result<bool> {
        Ok(self.compare(other, policy)?.zero)
    }

    fn combine(
        &self,
        other: &Self,
        poly: impl Fn(&Polynomial<Rational>, &Polynomial<Rational>) -> Polynomial<Rational>,
        expr: impl Fn(Expr, Expr) -> Expr,
    ) -> Self {
        let dim = ScalarFunction::dim(self);
        assert_eq!(
            dim,
            ScalarFunction::dim(other),
            "scalar field dimension mismatch"
        );
        match (self, other) {
            (ScalarField::Poly(a), ScalarField::Poly(b)) => ScalarField::Poly(poly(a, b)),
            _ => ScalarField::Expr {
                expr: expr(self.to_expr(), other.to_expr()),
                dim,
            },
        }
    }
}

impl ScalarFunction for ScalarField {
    fn zero(dim: usize) -> Self {
        ScalarField::Poly(Polynomial::zero(dim))
    }

    fn from_ratio(dim: usize, num: i64, den: i64) -> Self {
        ScalarField::Poly(<Polynomial<Rational> as ScalarFunction>::from_ratio(
            dim, num, den,
        ))
    }

    fn dim(&self) -> usize {
        match self {
            ScalarField::Poly(p) => p.dim(),
            ScalarField::Expr { dim, .. } => *dim,
        }
    }

    fn is_structurally_zero(&self) -> bool {
        match self {
            ScalarField::Poly(p) => p.is_zero(),
            ScalarField::Expr { expr, .. } => expr.is_zero(),
        }
    }

    fn plus(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b, |a, b| Expr::sum(vec![a, b]))
    }

    fn minus(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b, Expr::difference)
    }

    fn negated(&self) -> Self {
        match self {
            ScalarField::Poly(p) => ScalarField::Poly(-p),
            ScalarField::Expr { expr, dim } => ScalarField::Expr {
                expr: Expr::negate(expr.clone()),
                dim: *dim,
            },
        }
    }

    fn times(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b, |a, b| Expr::product(vec![a, b]))
    }

    fn scaled(&self, num: i64, den: i64) -> Self {
        match self {
            ScalarField::Poly(p) => ScalarField::Poly(p.scaled(num, den)),
            ScalarField::Expr { expr, dim } => ScalarField::Expr {
                expr: Expr::scale(super::rational(num, den), expr.clone()),
                dim: *dim,
            },
        }
    }

    fn partial(&self, axis: usize) -> Self {
        match self {
            ScalarField::Poly(p) => ScalarField::Poly(p.differentiate(axis)),
            ScalarField::Expr { expr, dim } => {
                assert!(axis < *dim, "axis {axis} out of range for dimension {dim}");
                ScalarField::Expr {
                    expr: expr.differentiate(axis),
                    dim: *dim,
                }
            }
        }
    }

    fn zero_check(&self, policy: &EqualityPolicy) -> Result<ZeroCheck> {
        match self {
            ScalarField::Poly(p) => p.zero_check(policy),
            ScalarField::Expr { expr, dim } => {
                if expr.is_zero() {
                    return Ok(ZeroCheck::exact_zero());
                }
                if let Some(p) = expr.to_polynomial(*dim) {
                    return p.zero_check(policy);
                }
                self.compare(&ScalarField::zero(*dim), policy)
            }
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Poly(p) => write!(f, "{p}"),
            ScalarField::Expr { expr, .. } => write!(f, "{expr}"),
        }
    }
}

impl From<Polynomial<Rational>> for ScalarField {
    fn from(p: Polynomial<Rational>) -> Self {
        ScalarField::Poly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{integer, rational};
    use crate::policy::SampleDomain;

    fn policy() -> EqualityPolicy {
        EqualityPolicy::default()
    }

    #[test]
    fn polynomial_equality_is_exact() {
        let x0 = ScalarField::coordinate(2, 0);
        let x1 = ScalarField::coordinate(2, 1);
        assert!(x0.plus(&x0).equals(&x0.scaled(2, 1), &policy()).unwrap());
        assert!(x0.times(&x1).equals(&x1.times(&x0), &policy()).unwrap());
        assert!(!x0.equals(&x1, &policy()).unwrap());
    }

    #[test]
    fn sampled_equality_of_reciprocal_powers() {
        // H^-1 H^-1 vs H^-2 with H = 1 + 1/r, built without like-factor merging.
        let r = Expr::radius(&[0, 1, 2]);
        let h = Expr::sum(vec![Expr::one(), Expr::quotient(Expr::one(), r)]);
        let inv = Expr::quotient(Expr::one(), h.clone());
        let lhs = ScalarField::expr(Expr::Product(vec![inv.clone(), inv]), 3);
        let rhs = ScalarField::expr(Expr::IntPow(Box::new(h), -2), 3);
        let p = EqualityPolicy {
            sample_count: 8,
            seed: 11,
            tol: 1e-9,
            domain: SampleDomain::PerfectSquareRadius {
                axes: vec![0, 1, 2],
                half_width: 9,
            },
        };
        assert!(lhs.equals(&rhs, &p).unwrap());
        let wrong = ScalarField::expr(Expr::quotient(Expr::one(), Expr::radius(&[0, 1, 2])), 3);
        assert!(!lhs.equals(&wrong, &p).unwrap());
    }

    #[test]
    fn mixed_backends_normalize_to_polynomial() {
        let e = ScalarField::expr(Expr::sum(vec![Expr::coord(0), Expr::coord(0)]), 1);
        let p = ScalarField::coordinate(1, 0).scaled(2, 1);
        let check = e.compare(&p, &policy()).unwrap();
        assert!(check.zero);
        assert_eq!(check.residual, 0.0);
    }

    #[test]
    fn nonzero_polynomial_reports_witness() {
        let p = ScalarField::coordinate(2, 1).plus(&ScalarField::constant(2, integer(1)));
        let z = p.zero_check(&policy()).unwrap();
        assert!(!z.zero);
        assert!(z.residual > 0.0);
        assert!(z.witness.is_some());
    }

    #[test]
    fn evaluation_checks_dimension() {
        let p = ScalarField::coordinate(2, 0);
        assert!(matches!(
            p.evaluate(&Point::from_ints(&[1])),
            Err(Error::DimMismatch { .. })
        ));
        assert_eq!(
            p.evaluate(&Point::new(vec![rational(1, 2), integer(0)]))
                .unwrap(),
            Value::Exact(rational(1, 2))
        );
    }

    #[test]
    fn from_expr_rejects_out_of_range_coordinates() {
        assert!(matches!(
            ScalarField::from_expr(Expr::coord(3), 3),
            Err(Error::AxisOutOfRange { axis: 3, dim: 3 })
        ));
    }

    #[test]
    fn formal_primitive_is_incomparable_by_sampling() {
        let u = ScalarField::expr(Expr::formal_primitive(Expr::one(), Expr::coord(0)), 1);
        assert_eq!(u.zero_check(&policy()), Err(Error::Unevaluable));
    }
}
