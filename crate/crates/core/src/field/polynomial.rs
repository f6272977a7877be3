use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Coefficient, Expr, Rational};

/// Exponent vector of a monomial, one entry per coordinate.
pub type Exponents = Vec<u32>;

/// Sparse multivariate polynomial in `dim` coordinates.
///
/// Terms are kept in a `BTreeMap` keyed by exponent vector and zero
/// coefficients are never stored, so two polynomials are equal exactly when
/// their term tables are.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C> {
    dim: usize,
    terms: BTreeMap<Exponents, C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    /// The coordinate function `x^axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "axis {axis} out of range for dimension {dim}");
        let mut exps = vec![0; dim];
        exps[axis] = 1;
        Self::monomial(dim, exps, C::one())
    }

    pub fn monomial(dim: usize, exps: Exponents, c: C) -> Self {
        assert_eq!(exps.len(), dim, "exponent vector length must equal dim");
        let mut p = Self::zero(dim);
        p.add_term(exps, c);
        p
    }

    /// Build from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, C)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent vector length must equal dim");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Exponents, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    /// Highest total degree among the stored terms; `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Exact partial derivative along `axis`.
    pub fn differentiate(&self, axis: usize) -> Self {
        assert!(
            axis < self.dim,
            "axis {axis} out of range for dimension {}",
            self.dim
        );
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e[axis];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[axis] -= 1;
            out.add_term(e2, c.clone() * C::from_ratio(i64::from(k), 1));
        }
        out
    }

    pub fn evaluate(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.dim, "point dimension must equal dim");
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// `∫₀¹ tᵏ p(t·x) dt`: every monomial of total degree `m` is divided by
    /// `k + m + 1`.
    pub fn homotopy_scale_integral(&self, k: u32) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let m: u32 = e.iter().sum();
                    let weight = C::from_ratio(1, i64::from(k + m + 1));
                    (e.clone(), c.clone() * weight)
                })
                .collect(),
        }
    }

    /// Multiply by `x^axis`.
    pub fn times_coordinate(&self, axis: usize) -> Self {
        assert!(axis < self.dim);
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[axis] += 1;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
    }
}

impl Polynomial<Rational> {
    /// Expression tree with the same value, in canonical term order.
    pub fn to_expr(&self) -> Expr {
        let terms = self.terms.iter().map(|(e, c)| {
            let mut factors = vec![Expr::Const(c.clone())];
            for (axis, &k) in e.iter().enumerate() {
                if k > 0 {
                    factors.push(Expr::pow(Expr::Coord(axis), k as i32));
                }
            }
            Expr::product(factors)
        });
        Expr::sum(terms.collect())
    }
}

impl<'a, C: Coefficient> Add<&'a Polynomial<C>> for &'a Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: &'a Polynomial<C>) -> Polynomial<C> {
        self.check_dim(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a, C: Coefficient> Sub<&'a Polynomial<C>> for &'a Polynomial<C> {
    type Output = Polynomial<C>;

    fn sub(self, rhs: &'a Polynomial<C>) -> Polynomial<C> {
        self.check_dim(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a, C: Coefficient> Mul<&'a Polynomial<C>> for &'a Polynomial<C> {
    type Output = Polynomial<C>;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &'a Polynomial<C>) -> Polynomial<C> {
        self.check_dim(rhs);
        let mut out = Polynomial::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

/// S-expression form, e.g. `(+ 1 (* 2 x0) (* 1/2 (^ x0 2) x1))`.
impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut factors = Vec::new();
                let is_constant = e.iter().all(|&k| k == 0);
                if is_constant || !c.is_one() {
                    factors.push(c.to_string());
                }
                for (axis, &k) in e.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => factors.push(format!("x{axis}")),
                        _ => factors.push(format!("(^ x{axis} {k})")),
                    }
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    format!("(* {})", factors.join(" "))
                }
            })
            .collect();
        match rendered.len() {
            0 => write!(f, "0"),
            1 => write!(f, "{}", rendered[0]),
            _ => write!(f, "(+ {})", rendered.join(" ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{integer, rational};

    type P = Polynomial<Rational>;

    fn x(dim: usize, axis: usize) -> P {
        P::coordinate(dim, axis)
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let five = P::constant(2, integer(5));
        assert!(five.differentiate(0).is_zero());
    }

    #[test]
    fn power_rule() {
        // (x0)^2 x1 -> 2 x0 x1
        let p = &(&x(2, 0) * &x(2, 0)) * &x(2, 1);
        let expected = (&x(2, 0) * &x(2, 1)).scale(&integer(2));
        assert_eq!(p.differentiate(0), expected);
    }

    #[test]
    fn evaluation_by_substitution() {
        let p = &(&x(2, 0) * &x(2, 0)) * &x(2, 1);
        assert_eq!(p.evaluate(&[integer(3), integer(2)]), integer(18));
    }

    #[test]
    fn canonical_form_collects_like_terms() {
        let lhs = &x(2, 0) + &x(2, 0);
        assert_eq!(lhs, x(2, 0).scale(&integer(2)));
        assert_eq!(&x(2, 0) * &x(2, 1), &x(2, 1) * &x(2, 0));
        assert!((&x(3, 2) - &x(3, 2)).is_zero());
    }

    #[test]
    fn homotopy_scale_integral_examples() {
        let one = P::one(2);
        assert_eq!(one.homotopy_scale_integral(0), one);

        let x0x1 = &x(2, 0) * &x(2, 1);
        assert_eq!(x0x1.homotopy_scale_integral(1), x0x1.scale(&rational(1, 4)));

        let cube = &(&x(1, 0) * &x(1, 0)) * &x(1, 0);
        assert_eq!(cube.homotopy_scale_integral(2), cube.scale(&rational(1, 6)));
    }

    #[test]
    fn display_is_canonical_sexpr() {
        let p = &(&P::one(2) + &x(2, 0).scale(&integer(2)))
            + &(&(&x(2, 0) * &x(2, 0)) * &x(2, 1)).scale(&rational(1, 2));
        assert_eq!(p.to_string(), "(+ 1 (* 2 x0) (* 1/2 (^ x0 2) x1))");
        assert_eq!(P::zero(3).to_string(), "0");
        assert_eq!(x(3, 1).to_string(), "x1");
    }

    #[test]
    fn float_coefficients() {
        let p: Polynomial<f64> = Polynomial::from_terms(2, [(vec![2, 1], 1.5), (vec![0, 0], -1.0)]);
        assert_eq!(p.evaluate(&[2.0, 3.0]), 17.0);
        let dp = p.differentiate(0);
        assert_eq!(dp.coefficient(&[1, 1]), 3.0);
    }
}
