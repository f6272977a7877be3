use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{Float, FromPrimitive, One, Signed, ToPrimitive, Zero};

use super::{integer, Point, Polynomial, Rational, Value};
use crate::error::{Error, Result};

/// Expression tree over the coordinates `x0 .. x{d-1}`.
///
/// Nodes are built through the smart constructors ([`Expr::sum`],
/// [`Expr::product`], ...), which fold constants and collect like terms and
/// like factors. No other simplification is attempted; equality of
/// non-polynomial expressions is decided by sampling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Rational),
    Coord(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    IntPow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    Log(Box<Expr>),
    /// An antiderivative known only through its derivative: the value is
    /// some `u(variable)` with `u' = integrand` (the integrand already
    /// composed with the variable). Never evaluated, only differentiated.
    FormalPrimitive {
        integrand: Box<Expr>,
        variable: Box<Expr>,
    },
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(integer(n))
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn coord(axis: usize) -> Expr {
        Expr::Coord(axis)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Sum with constant folding and like-term collection.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut constant = Rational::zero();
        let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack = terms;
        while let Some(term) = stack.pop() {
            match term {
                Expr::Sum(inner) => stack.extend(inner),
                Expr::Const(c) => constant += c,
                other => {
                    let (coef, key) = split_coefficient(other);
                    *collected.entry(key).or_insert_with(Rational::zero) += coef;
                }
            }
        }
        let mut out = Vec::with_capacity(collected.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::Const(constant));
        }
        for (key, coef) in collected {
            if coef.is_zero() {
                continue;
            }
            if coef.is_one() {
                out.push(key);
            } else {
                out.push(attach_coefficient(coef, key));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Product with constant folding; repeated bases merge into integer powers.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut constant = Rational::one();
        let mut bases: BTreeMap<Expr, i32> = BTreeMap::new();
        let mut stack = factors;
        while let Some(factor) = stack.pop() {
            match factor {
                Expr::Product(inner) => stack.extend(inner),
                Expr::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    constant *= c;
                }
                Expr::IntPow(base, n) => *bases.entry(*base).or_insert(0) += n,
                other => *bases.entry(other).or_insert(0) += 1,
            }
        }
        let mut rest: Vec<Expr> = bases
            .into_iter()
            .filter(|(_, n)| *n != 0)
            .map(|(base, n)| {
                if n == 1 {
                    base
                } else {
                    Expr::IntPow(Box::new(base), n)
                }
            })
            .collect();
        if rest.is_empty() {
            return Expr::Const(constant);
        }
        if !constant.is_one() {
            rest.insert(0, Expr::Const(constant));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::Product(rest)
        }
    }

    pub fn negate(a: Expr) -> Expr {
        Expr::product(vec![Expr::int(-1), a])
    }

    pub fn difference(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::negate(b)])
    }

    pub fn scale(c: Rational, a: Expr) -> Expr {
        Expr::product(vec![Expr::Const(c), a])
    }

    /// Quotient; fails only on a literal zero denominator.
    pub fn try_quotient(num: Expr, den: Expr) -> Result<Expr> {
        if let Expr::Const(c) = &den {
            if c.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            return Ok(Expr::product(vec![num, Expr::Const(c.recip())]));
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if num == den {
            return Ok(Expr::one());
        }
        Ok(Expr::Quotient(Box::new(num), Box::new(den)))
    }

    /// Quotient for denominators known to be nonzero expressions.
    ///
    /// Panics on a literal zero denominator.
    pub fn quotient(num: Expr, den: Expr) -> Expr {
        Expr::try_quotient(num, den).expect("quotient by the zero expression")
    }

    pub fn pow(base: Expr, n: i32) -> Expr {
        match (base, n) {
            (_, 0) => Expr::one(),
            (b, 1) => b,
            (Expr::Const(c), n) if !(c.is_zero() && n < 0) => Expr::Const(rational_pow(&c, n)),
            (Expr::IntPow(b, m), n) => Expr::pow(*b, m * n),
            (b, n) => Expr::IntPow(Box::new(b), n),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        if let Expr::Const(c) = &a {
            if let Some(r) = exact_sqrt(c) {
                return Expr::Const(r);
            }
        }
        Expr::Sqrt(Box::new(a))
    }

    pub fn log(a: Expr) -> Expr {
        if a.is_one() {
            return Expr::zero();
        }
        Expr::Log(Box::new(a))
    }

    pub fn formal_primitive(integrand: Expr, variable: Expr) -> Expr {
        Expr::FormalPrimitive {
            integrand: Box::new(integrand),
            variable: Box::new(variable),
        }
    }

    /// `sqrt(x_axes[0]^2 + ...)`: Euclidean radius over the given axes.
    pub fn radius(axes: &[usize]) -> Expr {
        Expr::sqrt(Expr::sum(
            axes.iter().map(|&a| Expr::pow(Expr::Coord(a), 2)).collect(),
        ))
    }

    /// Exact partial derivative along `axis`.
    pub fn differentiate(&self, axis: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Coord(i) => {
                if *i == axis {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| t.differentiate(axis)).collect()),
            Expr::Product(factors) => {
                let mut terms = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    let df = f.differentiate(axis);
                    if df.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = Vec::with_capacity(factors.len());
                    parts.push(df);
                    parts.extend(
                        factors
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, g)| g.clone()),
                    );
                    terms.push(Expr::product(parts));
                }
                Expr::sum(terms)
            }
            Expr::Quotient(a, b) => {
                let da = a.differentiate(axis);
                let db = b.differentiate(axis);
                let numerator = Expr::difference(
                    Expr::product(vec![da, (**b).clone()]),
                    Expr::product(vec![(**a).clone(), db]),
                );
                if numerator.is_zero() {
                    return Expr::zero();
                }
                Expr::quotient(numerator, Expr::pow((**b).clone(), 2))
            }
            Expr::IntPow(b, n) => {
                let db = b.differentiate(axis);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![
                    Expr::int(i64::from(*n)),
                    Expr::pow((**b).clone(), n - 1),
                    db,
                ])
            }
            Expr::Sqrt(a) => {
                let da = a.differentiate(axis);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::quotient(da, Expr::product(vec![Expr::int(2), self.clone()]))
            }
            Expr::Log(a) => {
                let da = a.differentiate(axis);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::quotient(da, (**a).clone())
            }
            Expr::FormalPrimitive {
                integrand,
                variable,
            } => {
                let dv = variable.differentiate(axis);
                Expr::product(vec![(**integrand).clone(), dv])
            }
        }
    }

    /// Replace every `Coord(i)` by `values[i]`.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Coord(i) => values
                .get(*i)
                .cloned()
                .unwrap_or_else(|| panic!("substitution has no value for x{i}")),
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute(values)).collect()),
            Expr::Product(fs) => Expr::product(fs.iter().map(|t| t.substitute(values)).collect()),
            Expr::Quotient(a, b) => Expr::quotient(a.substitute(values), b.substitute(values)),
            Expr::IntPow(b, n) => Expr::pow(b.substitute(values), *n),
            Expr::Sqrt(a) => Expr::sqrt(a.substitute(values)),
            Expr::Log(a) => Expr::log(a.substitute(values)),
            Expr::FormalPrimitive {
                integrand,
                variable,
            } => Expr::formal_primitive(integrand.substitute(values), variable.substitute(values)),
        }
    }

    /// Coordinates the expression depends on syntactically.
    pub fn coordinates(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_coordinates(&mut out);
        out
    }

    fn collect_coordinates(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(i) => {
                out.insert(*i);
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.collect_coordinates(out)),
            Expr::Quotient(a, b) => {
                a.collect_coordinates(out);
                b.collect_coordinates(out);
            }
            Expr::IntPow(a, _) | Expr::Sqrt(a) | Expr::Log(a) => a.collect_coordinates(out),
            Expr::FormalPrimitive {
                integrand,
                variable,
            } => {
                integrand.collect_coordinates(out);
                variable.collect_coordinates(out);
            }
        }
    }

    pub fn contains_formal_primitive(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Coord(_) => false,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(Expr::contains_formal_primitive),
            Expr::Quotient(a, b) => a.contains_formal_primitive() || b.contains_formal_primitive(),
            Expr::IntPow(a, _) | Expr::Sqrt(a) | Expr::Log(a) => a.contains_formal_primitive(),
            Expr::FormalPrimitive { .. } => true,
        }
    }

    /// Polynomial with the same value, if the tree only uses sums, products,
    /// non-negative integer powers and division by nonzero constants.
    pub fn to_polynomial(&self, dim: usize) -> Option<Polynomial<Rational>> {
        type P = Polynomial<Rational>;
        match self {
            Expr::Const(c) => Some(P::constant(dim, c.clone())),
            Expr::Coord(i) => (*i < dim).then(|| P::coordinate(dim, *i)),
            Expr::Sum(ts) => ts
                .iter()
                .try_fold(P::zero(dim), |acc, t| Some(&acc + &t.to_polynomial(dim)?)),
            Expr::Product(fs) => fs
                .iter()
                .try_fold(P::one(dim), |acc, f| Some(&acc * &f.to_polynomial(dim)?)),
            Expr::Quotient(a, b) => match b.as_const() {
                Some(c) if !c.is_zero() => Some(a.to_polynomial(dim)?.scale(&c.recip())),
                _ => None,
            },
            Expr::IntPow(b, n) if *n >= 0 => {
                let base = b.to_polynomial(dim)?;
                let mut acc = P::one(dim);
                for _ in 0..*n {
                    acc = &acc * &base;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// Evaluate at a rational point, staying exact as long as possible.
    pub fn evaluate(&self, point: &Point) -> Result<Value> {
        let singular = |reason: &str| Error::SingularPoint {
            point: point.clone(),
            reason: reason.to_string(),
        };
        let v = match self {
            Expr::Const(c) => Value::Exact(c.clone()),
            Expr::Coord(i) => match point.coords().get(*i) {
                Some(c) => Value::Exact(c.clone()),
                None => {
                    return Err(Error::AxisOutOfRange {
                        axis: *i,
                        dim: point.dim(),
                    })
                }
            },
            Expr::Sum(ts) => {
                let mut acc = Value::Exact(Rational::zero());
                for t in ts {
                    acc = value_add(acc, t.evaluate(point)?);
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = Value::Exact(Rational::one());
                for f in fs {
                    acc = value_mul(acc, f.evaluate(point)?);
                }
                acc
            }
            Expr::Quotient(a, b) => {
                let num = a.evaluate(point)?;
                let den = b.evaluate(point)?;
                value_div(num, den).ok_or_else(|| singular("division by zero"))?
            }
            Expr::IntPow(b, n) => {
                let base = b.evaluate(point)?;
                value_powi(base, *n).ok_or_else(|| singular("zero raised to a negative power"))?
            }
            Expr::Sqrt(a) => match a.evaluate(point)? {
                Value::Exact(r) => {
                    if r.is_negative() {
                        return Err(singular("square root of a negative number"));
                    }
                    match exact_sqrt(&r) {
                        Some(s) => Value::Exact(s),
                        None => Value::Approx(r.to_f64().unwrap_or(f64::NAN).sqrt()),
                    }
                }
                Value::Approx(x) => {
                    if x < 0.0 {
                        return Err(singular("square root of a negative number"));
                    }
                    Value::Approx(x.sqrt())
                }
            },
            Expr::Log(a) => match a.evaluate(point)? {
                Value::Exact(r) => {
                    if !r.is_positive() {
                        return Err(singular("logarithm of a non-positive number"));
                    }
                    if r.is_one() {
                        Value::Exact(Rational::zero())
                    } else {
                        Value::Approx(rational_ln(&r))
                    }
                }
                Value::Approx(x) => {
                    if x <= 0.0 {
                        return Err(singular("logarithm of a non-positive number"));
                    }
                    Value::Approx(x.ln())
                }
            },
            Expr::FormalPrimitive { .. } => return Err(Error::Unevaluable),
        };
        if let Value::Approx(x) = v {
            if !x.is_finite() {
                return Err(singular("non-finite value"));
            }
        }
        Ok(v)
    }

    /// Plain floating-point evaluation in any `Float` type.
    pub fn evaluate_float<F: Float + FromPrimitive>(&self, point: &[F]) -> Result<F> {
        let singular = |reason: &str| Error::SingularPoint {
            point: Point::new(
                point
                    .iter()
                    .map(|x| {
                        Rational::from_float(x.to_f64().unwrap_or(0.0))
                            .unwrap_or_else(Rational::zero)
                    })
                    .collect(),
            ),
            reason: reason.to_string(),
        };
        let v = match self {
            Expr::Const(c) => F::from_f64(c.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(F::nan),
            Expr::Coord(i) => *point.get(*i).ok_or(Error::AxisOutOfRange {
                axis: *i,
                dim: point.len(),
            })?,
            Expr::Sum(ts) => ts
                .iter()
                .try_fold(F::zero(), |acc, t| Ok(acc + t.evaluate_float(point)?))?,
            Expr::Product(fs) => fs
                .iter()
                .try_fold(F::one(), |acc, t| Ok(acc * t.evaluate_float(point)?))?,
            Expr::Quotient(a, b) => {
                let den = b.evaluate_float(point)?;
                if den.is_zero() {
                    return Err(singular("division by zero"));
                }
                a.evaluate_float(point)? / den
            }
            Expr::IntPow(b, n) => {
                let base = b.evaluate_float(point)?;
                if base.is_zero() && *n < 0 {
                    return Err(singular("zero raised to a negative power"));
                }
                base.powi(*n)
            }
            Expr::Sqrt(a) => {
                let x = a.evaluate_float(point)?;
                if x < F::zero() {
                    return Err(singular("square root of a negative number"));
                }
                x.sqrt()
            }
            Expr::Log(a) => {
                let x = a.evaluate_float(point)?;
                if x <= F::zero() {
                    return Err(singular("logarithm of a non-positive number"));
                }
                x.ln()
            }
            Expr::FormalPrimitive { .. } => return Err(Error::Unevaluable),
        };
        if !v.is_finite() {
            return Err(singular("non-finite value"));
        }
        Ok(v)
    }
}

fn split_coefficient(term: Expr) -> (Rational, Expr) {
    match term {
        Expr::Product(mut fs) if matches!(fs.first(), Some(Expr::Const(_))) => {
            let c = match fs.remove(0) {
                Expr::Const(c) => c,
                _ => unreachable!(),
            };
            let rest = if fs.len() == 1 {
                fs.pop().unwrap()
            } else {
                Expr::Product(fs)
            };
            (c, rest)
        }
        other => (Rational::one(), other),
    }
}

fn attach_coefficient(coef: Rational, key: Expr) -> Expr {
    match key {
        Expr::Product(mut fs) => {
            fs.insert(0, Expr::Const(coef));
            Expr::Product(fs)
        }
        other => Expr::Product(vec![Expr::Const(coef), other]),
    }
}

fn rational_pow(base: &Rational, n: i32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    if n < 0 {
        acc.recip()
    } else {
        acc
    }
}

fn exact_int_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// Square root of a rational when both numerator and denominator are
/// perfect squares.
pub(crate) fn exact_sqrt(r: &Rational) -> Option<Rational> {
    let num = exact_int_sqrt(r.numer())?;
    let den = exact_int_sqrt(r.denom())?;
    Some(Rational::new(num, den))
}

fn rational_ln(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(x) if x.is_finite() && x > 0.0 => x.ln(),
        _ => {
            // Numerator or denominator outside f64 range.
            let bits = |n: &BigInt| n.bits() as f64;
            let (nb, db) = (bits(r.numer()), bits(r.denom()));
            let shift = |n: &BigInt, b: f64| {
                let excess = (b - 60.0).max(0.0) as u64;
                (n >> excess).to_f64().unwrap_or(f64::NAN).ln()
                    + excess as f64 * std::f64::consts::LN_2
            };
            shift(r.numer(), nb) - shift(r.denom(), db)
        }
    }
}

fn value_add(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x + y),
        (a, b) => Value::Approx(a.to_f64() + b.to_f64()),
    }
}

fn value_mul(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x * y),
        (a, b) => Value::Approx(a.to_f64() * b.to_f64()),
    }
}

#[allow(clippy::redundant_guards)]
fn value_div(a: Value, b: Value) -> Option<Value> {
    match (a, b) {
        (_, Value::Exact(y)) if y.is_zero() => None,
        (_, Value::Approx(y)) if y == 0.0 => None,
        (Value::Exact(x), Value::Exact(y)) => Some(Value::Exact(x / y)),
        (a, b) => Some(Value::Approx(a.to_f64() / b.to_f64())),
    }
}

fn value_powi(base: Value, n: i32) -> Option<Value> {
    match base {
        Value::Exact(x) => {
            if x.is_zero() && n < 0 {
                None
            } else {
                Some(Value::Exact(rational_pow(&x, n)))
            }
        }
        Value::Approx(x) => {
            if x == 0.0 && n < 0 {
                None
            } else {
                Some(Value::Approx(x.powi(n)))
            }
        }
    }
}

/// S-expression rendering, the same grammar the command-line parser reads.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, op: &str, xs: &[Expr]) -> fmt::Result {
            write!(f, "({op}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Sum(ts) => list(f, "+", ts),
            Expr::Product(fs) => list(f, "*", fs),
            Expr::Quotient(a, b) => write!(f, "(/ {a} {b})"),
            Expr::IntPow(b, n) => write!(f, "(^ {b} {n})"),
            Expr::Sqrt(a) => write!(f, "(sqrt {a})"),
            Expr::Log(a) => write!(f, "(log {a})"),
            Expr::FormalPrimitive {
                integrand,
                variable,
            } => write!(f, "(primitive {integrand} {variable})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rational;

    fn x(i: usize) -> Expr {
        Expr::Coord(i)
    }

    #[test]
    fn constant_folding_and_like_terms() {
        assert_eq!(
            Expr::sum(vec![x(0), x(0)]),
            Expr::product(vec![Expr::int(2), x(0)])
        );
        assert_eq!(Expr::difference(x(1), x(1)), Expr::zero());
        assert_eq!(
            Expr::product(vec![x(0), x(1)]),
            Expr::product(vec![x(1), x(0)])
        );
        assert_eq!(Expr::product(vec![x(0), x(0)]), Expr::pow(x(0), 2));
        assert_eq!(Expr::sum(vec![Expr::int(2), Expr::int(3)]), Expr::int(5));
        assert_eq!(
            Expr::product(vec![Expr::zero(), Expr::log(x(0))]),
            Expr::zero()
        );
    }

    #[test]
    fn quotient_rejects_literal_zero() {
        assert_eq!(
            Expr::try_quotient(x(0), Expr::zero()),
            Err(Error::ZeroDenominator)
        );
        assert_eq!(
            Expr::try_quotient(x(0), Expr::int(2)).unwrap(),
            Expr::scale(rational(1, 2), x(0))
        );
    }

    #[test]
    fn reciprocal_of_sqrt_at_perfect_square() {
        let e = Expr::quotient(Expr::one(), Expr::radius(&[0, 1, 2]));
        let v = e.evaluate(&Point::from_ints(&[1, 2, 2])).unwrap();
        assert_eq!(v, Value::Exact(rational(1, 3)));
    }

    #[test]
    fn sqrt_derivative_matches_finite_difference() {
        // d/dx1 sqrt(x0^2 + x1^2 + x2^2) at (1, 2, 2) = 2/3.
        let r = Expr::radius(&[0, 1, 2]);
        let d = r.differentiate(1);
        assert_eq!(
            d.evaluate(&Point::from_ints(&[1, 2, 2])).unwrap(),
            Value::Exact(rational(2, 3))
        );

        let h = 1e-6;
        let f = |y: f64| r.evaluate_float(&[1.0, y, 2.0]).unwrap();
        let fd = (f(2.0 + h) - f(2.0 - h)) / (2.0 * h);
        assert!((fd - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn formal_primitive_differentiates_by_chain_rule() {
        let h = Expr::sum(vec![Expr::one(), Expr::pow(x(1), 2)]);
        let u = Expr::formal_primitive(Expr::quotient(Expr::one(), h.clone()), h.clone());
        let du = u.differentiate(1);
        let expected = Expr::product(vec![
            Expr::quotient(Expr::one(), h),
            Expr::product(vec![Expr::int(2), x(1)]),
        ]);
        assert_eq!(du, expected);
        assert_eq!(
            u.evaluate(&Point::from_ints(&[0, 1])),
            Err(Error::Unevaluable)
        );
    }

    #[test]
    fn singular_points_are_reported() {
        let e = Expr::quotient(Expr::one(), x(0));
        assert!(matches!(
            e.evaluate(&Point::from_ints(&[0])),
            Err(Error::SingularPoint { .. })
        ));
        let l = Expr::log(x(0));
        assert!(matches!(
            l.evaluate(&Point::from_ints(&[-1])),
            Err(Error::SingularPoint { .. })
        ));
        assert_eq!(
            l.evaluate(&Point::from_ints(&[1])).unwrap(),
            Value::Exact(Rational::zero())
        );
    }

    #[test]
    fn to_polynomial_recognises_polynomials_only() {
        let p = Expr::quotient(Expr::pow(Expr::sum(vec![x(0), x(1)]), 2), Expr::int(2));
        let poly = p.to_polynomial(2).unwrap();
        assert_eq!(poly.total_degree(), Some(2));
        assert!(Expr::sqrt(x(0)).to_polynomial(1).is_none());
        assert!(Expr::pow(x(0), -1).to_polynomial(1).is_none());
    }

    #[test]
    fn substitution_composes() {
        // f(H) = H^-2 with H = 1 + x1
        let f = Expr::pow(x(0), -2);
        let h = Expr::sum(vec![Expr::one(), x(1)]);
        let composed = f.substitute(std::slice::from_ref(&h));
        assert_eq!(composed, Expr::pow(h, -2));
    }

    #[test]
    fn huge_rational_log_stays_finite() {
        let big = rational_pow(&Rational::from_integer(BigInt::from(10)), 400);
        let v = rational_ln(&big);
        assert!((v - 400.0 * 10f64.ln()).abs() < 1e-6);
    }
}
