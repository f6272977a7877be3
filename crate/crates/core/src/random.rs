//! Seeded generators for random polynomial fields, tensors and cochains.

use rand::Rng;

use crate::complex::{phi, project_to_k, CochainElement};
use crate::error::Result;
use crate::field::polynomial::Polynomial;
use crate::field::{integer, Rational};
use crate::tensor::Tensor;

pub type RandomPolynomial = Polynomial<Rational>;

/// Shape of random polynomials: up to `max_terms` monomials of total degree
/// at most `max_degree`, integer coefficients in `[-coefficient_bound,
/// coefficient_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolynomialShape {
    pub max_degree: u32,
    pub max_terms: usize,
    pub coefficient_bound: i64,
}

impl Default for PolynomialShape {
    fn default() -> Self {
        PolynomialShape {
            max_degree: 3,
            max_terms: 3,
            coefficient_bound: 4,
        }
    }
}

pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    dim: usize,
    shape: PolynomialShape,
) -> RandomPolynomial {
    let terms = rng.random_range(0..=shape.max_terms);
    let mut out = Polynomial::zero(dim);
    for _ in 0..terms {
        let degree = rng.random_range(0..=shape.max_degree);
        let mut exps = vec![0u32; dim];
        for _ in 0..degree {
            exps[rng.random_range(0..dim)] += 1;
        }
        let c = rng.random_range(-shape.coefficient_bound..=shape.coefficient_bound);
        out = &out + &Polynomial::monomial(dim, exps, integer(c));
    }
    out
}

pub fn random_tensor<R: Rng>(
    rng: &mut R,
    dim: usize,
    rank: usize,
    shape: PolynomialShape,
) -> Tensor<RandomPolynomial> {
    Tensor::from_fn(dim, rank, |_| random_polynomial(rng, dim, shape))
}

/// A random element of K(q), projected from a random tensor.
pub fn random_k_element<R: Rng>(
    rng: &mut R,
    dim: usize,
    q: usize,
    shape: PolynomialShape,
) -> Result<CochainElement<RandomPolynomial>> {
    let rank = if q == 0 { 0 } else { q + 1 };
    project_to_k(&random_tensor(rng, dim, rank, shape), q)
}

/// A random element of G(q), the image of a random K(q) element under phi.
pub fn random_g_element<R: Rng>(
    rng: &mut R,
    dim: usize,
    q: usize,
    shape: PolynomialShape,
) -> Result<CochainElement<RandomPolynomial>> {
    phi(&random_k_element(rng, dim, q, shape)?)
}

/// A random family of p-forms: rank `p + 1`, skew in the first `p` slots.
pub fn random_form<R: Rng>(
    rng: &mut R,
    dim: usize,
    p: usize,
    shape: PolynomialShape,
) -> Result<Tensor<RandomPolynomial>> {
    let t = random_tensor(rng, dim, p + 1, shape);
    let leading: Vec<usize> = (0..p).collect();
    t.skew_symmetrize(&leading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{is_member, Space};
    use crate::policy::EqualityPolicy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic() {
        let a = random_tensor(
            &mut ChaCha8Rng::seed_from_u64(3),
            3,
            2,
            PolynomialShape::default(),
        );
        let b = random_tensor(
            &mut ChaCha8Rng::seed_from_u64(3),
            3,
            2,
            PolynomialShape::default(),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn degree_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_polynomial(&mut rng, 4, PolynomialShape::default());
            assert!(p.total_degree().unwrap_or(0) <= 3);
        }
    }

    #[test]
    fn random_elements_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let policy = EqualityPolicy::default();
        for q in 0..4 {
            let k = random_k_element(&mut rng, 3, q, PolynomialShape::default()).unwrap();
            assert!(is_member(k.tensor(), Space::K(q), &policy)
                .unwrap()
                .is_member());
            let g = random_g_element(&mut rng, 3, q, PolynomialShape::default()).unwrap();
            assert!(is_member(g.tensor(), Space::G(q), &policy)
                .unwrap()
                .is_member());
        }
    }
}
