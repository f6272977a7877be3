//! Constructive exactness of the K complex on `ℝᵈ` for polynomial cochains.
//!
//! Forms here carry fully skew components in their leading `p` slots, with
//! any further trailing slots treated as a family index. The exterior
//! derivative in these components is `(dω)_{μ₀…μₚ} = (p+1) ∂_{[μ₀} ω_{μ₁…μₚ]}`
//! and the radial homotopy is
//! `(hω)_{μ₂…μₚ}(x) = ∫₀¹ t^{p-1} xᵃ ω_{a μ₂…μₚ}(t x) dt`, so that
//! `d h + h d = id` on p-forms with p ≥ 1.

use crate::complex::{d_k, d_nabla, is_member, CochainElement, Space};
use crate::error::{Error, Result};
use crate::field::{Coefficient, Polynomial, Rational, ScalarField};
use crate::policy::EqualityPolicy;
use crate::tensor::Tensor;

type PolyTensor<C> = Tensor<Polynomial<C>>;

/// A potential for a closed K(q) element.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialResult<C> {
    /// Element of K(q-1) whose coboundary is the input.
    pub potential: CochainElement<Polynomial<C>>,
    /// The (q-1)-form `B` used to push the raw homotopy output into K(q-1);
    /// absent for q = 1.
    pub correction: Option<PolyTensor<C>>,
    /// Worst entry of `d_K(potential) − input`.
    pub residual: f64,
}

/// Exterior derivative of a family of p-forms (skew in the first `p` slots).
pub fn exterior_derivative<C: Coefficient>(
    form: &PolyTensor<C>,
    p: usize,
) -> Result<PolyTensor<C>> {
    if p > form.rank() {
        return Err(Error::InvalidPositions(format!(
            "form degree {p} exceeds rank {}",
            form.rank()
        )));
    }
    let leading: Vec<usize> = (0..=p).collect();
    Ok(form
        .nabla()
        .skew_symmetrize(&leading)?
        .scaled(p as i64 + 1, 1))
}

/// Raw radial homotopy operator on a family of p-forms, p ≥ 1. No
/// closedness precondition; the output has rank one less than the input.
pub fn homotopy_operator<C: Coefficient>(omega: &PolyTensor<C>, p: usize) -> Result<PolyTensor<C>> {
    if p == 0 || p > omega.rank() {
        return Err(Error::InvalidPositions(format!(
            "homotopy needs 1 <= p <= rank, got p = {p}, rank {}",
            omega.rank()
        )));
    }
    let dim = omega.dim();
    let weight = (p - 1) as u32;
    let mut src = vec![0; omega.rank()];
    Ok(Tensor::from_fn(dim, omega.rank() - 1, |rest| {
        src[1..].copy_from_slice(rest);
        let mut acc = Polynomial::zero(dim);
        for a in 0..dim {
            src[0] = a;
            let component = omega.get(&src);
            if component.is_zero() {
                continue;
            }
            acc = &acc
                + &component
                    .homotopy_scale_integral(weight)
                    .times_coordinate(a);
        }
        acc
    }))
}

fn require_skew<C: Coefficient>(
    omega: &PolyTensor<C>,
    p: usize,
    policy: &EqualityPolicy,
) -> Result<()> {
    let leading: Vec<usize> = (0..p).collect();
    let check = omega
        .minus(&omega.skew_symmetrize(&leading)?)
        .check_zero(policy)?;
    if !check.zero {
        return Err(Error::NotSkew {
            slots: p,
            index: check.index.unwrap_or_default(),
        });
    }
    Ok(())
}

/// Homotopy operator with its preconditions checked: `omega` must be skew
/// in its first `p` slots and closed. The result satisfies `d(hω) = ω`.
pub fn de_rham_homotopy<C: Coefficient>(omega: &PolyTensor<C>, p: usize) -> Result<PolyTensor<C>> {
    let policy = EqualityPolicy::default();
    if p == 0 || p > omega.rank() {
        return Err(Error::InvalidPositions(format!(
            "form degree {p} invalid for rank {}",
            omega.rank()
        )));
    }
    require_skew(omega, p, &policy)?;
    let closed = exterior_derivative(omega, p)?.check_zero(&policy)?;
    if !closed.zero {
        return Err(Error::NotClosed {
            index: closed.index.unwrap_or_default(),
            residual: closed.worst_residual,
        });
    }
    homotopy_operator(omega, p)
}

/// Find `A ∈ K(q-1)` with `d_K(A) = T` for a closed polynomial `T ∈ K(q)`, q ≥ 1.
///
/// For q = 1 the symmetric tensor is integrated twice, first along its
/// leading slot, giving a scalar whose Hessian is `T`. For q ≥ 2 the raw
/// potential `A = q·h(T)` solves `d_∇ A = T` but need not have vanishing total
/// alternation; its alternation `s(A)` is closed, so `B = q·h(s(A))` satisfies
/// `s(∇B) = s(A)` and `A − d_∇ B` is the returned potential.
pub fn solve_potential<C: Coefficient>(
    t: &CochainElement<Polynomial<C>>,
) -> Result<PotentialResult<C>> {
    let q = match t.space() {
        Space::K(q) if q >= 1 => q,
        found => {
            return Err(Error::WrongSpace {
                expected: "K(q) with q >= 1",
                found,
            })
        }
    };
    let policy = EqualityPolicy::default();
    let closed = d_k(t)?.tensor().check_zero(&policy)?;
    if !closed.zero {
        return Err(Error::NotClosed {
            index: closed.index.unwrap_or_default(),
            residual: closed.worst_residual,
        });
    }
    let input = t.tensor();
    let (potential, correction) = if q == 1 {
        let gradient = de_rham_homotopy(input, 1)?;
        (de_rham_homotopy(&gradient, 1)?, None)
    } else {
        let raw = de_rham_homotopy(input, q)?.scaled(q as i64, 1);
        let alternation = raw.skew_all();
        let b = de_rham_homotopy(&alternation, q)?.scaled(q as i64, 1);
        (raw.minus(&d_nabla(&b)?), Some(b))
    };
    let potential = CochainElement::new(potential, Space::K(q - 1), &policy)?;
    let check = d_k(&potential)?.tensor().minus(input).check_zero(&policy)?;
    Ok(PotentialResult {
        potential,
        correction,
        residual: check.worst_residual,
    })
}

/// [`solve_potential`] for general scalar fields; every entry must be
/// polynomial.
pub fn solve_field_potential(t: &CochainElement<ScalarField>) -> Result<PotentialResult<Rational>> {
    let poly = t.tensor().try_map_into(ScalarField::to_polynomial)?;
    let element = CochainElement::new(poly, t.space(), &EqualityPolicy::default())?;
    solve_potential(&element)
}

/// `{1, x⁰, …, x^{d-1}}`: the affine functions, which span the kernel of the
/// Hessian on `ℝᵈ`.
pub fn affine_kernel_basis(dim: usize) -> Vec<Polynomial<Rational>> {
    assert!(dim >= 1, "dimension must be at least 1");
    std::iter::once(Polynomial::one(dim))
        .chain((0..dim).map(|a| Polynomial::coordinate(dim, a)))
        .collect()
}

/// Rank of the coefficient vectors of `polys` over the union of their
/// monomials, by exact Gaussian elimination.
pub fn coefficient_rank(polys: &[Polynomial<Rational>]) -> usize {
    let mut monomials: Vec<Vec<u32>> = polys
        .iter()
        .flat_map(|p| p.terms().map(|(e, _)| e.clone()))
        .collect();
    monomials.sort();
    monomials.dedup();
    let mut rows: Vec<Vec<Rational>> = polys
        .iter()
        .map(|p| monomials.iter().map(|m| p.coefficient(m)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..monomials.len() {
        let Some(pivot) = (rank..rows.len()).find(|&r| !num_traits::Zero::is_zero(&rows[r][col]))
        else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || num_traits::Zero::is_zero(&row[col]) {
                continue;
            }
            let factor = row[col].clone() / pivot_row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= factor.clone() * y.clone();
            }
        }
        rank += 1;
    }
    rank
}

/// True when every member of `basis` is annihilated by the Hessian.
pub fn annihilated_by_hessian(basis: &[Polynomial<Rational>]) -> Result<bool> {
    let policy = EqualityPolicy::default();
    for b in basis {
        let e = CochainElement::new(Tensor::scalar(b.clone()), Space::K(0), &policy)?;
        if !d_k(&e)?.tensor().is_structurally_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership-checked convenience: is `t` a closed element of `space`?
pub fn is_closed_member<C: Coefficient>(t: &PolyTensor<C>, space: Space) -> Result<bool> {
    let policy = EqualityPolicy::default();
    if !is_member(t, space, &policy)?.is_member() {
        return Ok(false);
    }
    let e = CochainElement::trusted(t.clone(), space);
    Ok(d_k(&e)?.tensor().check_zero(&policy)?.zero)
}
