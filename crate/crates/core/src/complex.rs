//! The K and G cochain complexes over flat coordinate space.
//!
//! A K(q) element for q ≥ 2 is a rank-(q+1) tensor `T_{μ₁…μ_q ν}` that is
//! skew in its first q slots and whose total alternation vanishes. K(1) is
//! the symmetric rank-2 tensors and K(0) the scalar fields. A G(q) element
//! for q ≥ 2 is skew in its first q-1 slots, symmetric in the last two, and
//! satisfies the signed cyclic identity `Σᵢ (-1)^{iq} S∘τⁱ = 0`. The two
//! complexes are isomorphic through `phi` (symmetrize the last pair) and `psi`
//! (scaled alternation over the leading q slots).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarFunction;
use crate::policy::EqualityPolicy;
use crate::tensor::{CyclicPermutation, Tensor, TensorCheck};

/// A graded piece of one of the two complexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    K(usize),
    G(usize),
}

impl Space {
    pub fn grade(&self) -> usize {
        match *self {
            Space::K(q) | Space::G(q) => q,
        }
    }

    /// Tensor rank of elements: 0 for grade 0, `q + 1` otherwise.
    pub fn rank(&self) -> usize {
        match self.grade() {
            0 => 0,
            q => q + 1,
        }
    }

    pub fn next(&self) -> Space {
        match *self {
            Space::K(q) => Space::K(q + 1),
            Space::G(q) => Space::G(q + 1),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::K(q) => write!(f, "K({q})"),
            Space::G(q) => write!(f, "G({q})"),
        }
    }
}

/// One named identity checked during membership validation.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipCheck {
    pub name: &'static str,
    pub result: TensorCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub space: Space,
    pub checks: Vec<MembershipCheck>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.checks.iter().all(|c| c.result.zero)
    }

    pub fn worst(&self) -> Option<&MembershipCheck> {
        self.checks
            .iter()
            .fold(None, |acc: Option<&MembershipCheck>, c| match acc {
                None => Some(c),
                Some(a) => {
                    let worse = (!c.result.zero && a.result.zero)
                        || (c.result.zero == a.result.zero
                            && c.result.worst_residual > a.result.worst_residual);
                    Some(if worse { c } else { a })
                }
            })
    }

    pub(crate) fn into_error(self) -> Error {
        let space = self.space;
        match self.checks.into_iter().find(|c| !c.result.zero) {
            Some(c) => Error::InvalidMember {
                space,
                check: c.name.to_string(),
                index: c.result.index.unwrap_or_default(),
                residual: c.result.worst_residual,
            },
            None => unreachable!("into_error called on a passing report"),
        }
    }
}

/// Residual of the signed cyclic sum `Σᵢ₌₀^q (-1)^{iq} S∘τⁱ` over all q+1 slots.
pub fn cyclic_sum<S: ScalarFunction>(t: &Tensor<S>, q: usize) -> Result<Tensor<S>> {
    let size = t.rank();
    if size != q + 1 {
        return Err(Error::RankMismatch {
            expected: q + 1,
            found: size,
        });
    }
    let mut acc = Tensor::zeros(t.dim(), size);
    for i in 0..size {
        let term = t.permute_slots(&CyclicPermutation::new(size, i).slot_order())?;
        acc = if (i * q).is_multiple_of(2) {
            acc.plus(&term)
        } else {
            acc.minus(&term)
        };
    }
    Ok(acc)
}

/// Test every identity defining `space`.
pub fn is_member<S: ScalarFunction>(
    t: &Tensor<S>,
    space: Space,
    policy: &EqualityPolicy,
) -> Result<MembershipReport> {
    if t.rank() != space.rank() {
        return Err(Error::RankMismatch {
            expected: space.rank(),
            found: t.rank(),
        });
    }
    let mut checks = Vec::new();
    let q = space.grade();
    let mut push = |name: &'static str, residual: Tensor<S>| -> Result<()> {
        checks.push(MembershipCheck {
            name,
            result: residual.check_zero(policy)?,
        });
        Ok(())
    };
    match (space, q) {
        (_, 0) => {}
        (_, 1) => push("symmetric", t.minus(&t.swap_slots(0, 1)?))?,
        (Space::K(q), _) => {
            let leading: Vec<usize> = (0..q).collect();
            push(
                "skew in leading slots",
                t.minus(&t.skew_symmetrize(&leading)?),
            )?;
            push("total alternation vanishes", t.skew_all())?;
        }
        (Space::G(q), _) => {
            if q >= 3 {
                let leading: Vec<usize> = (0..q - 1).collect();
                push(
                    "skew in leading slots",
                    t.minus(&t.skew_symmetrize(&leading)?),
                )?;
            }
            push("symmetric in last pair", t.minus(&t.swap_slots(q - 1, q)?))?;
            push("signed cyclic sum vanishes", cyclic_sum(t, q)?)?;
        }
    }
    Ok(MembershipReport { space, checks })
}

/// A tensor together with the graded space it has been validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct CochainElement<S> {
    tensor: Tensor<S>,
    space: Space,
}

impl<S: ScalarFunction> CochainElement<S> {
    /// Validate `tensor` as an element of `space`.
    pub fn new(tensor: Tensor<S>, space: Space, policy: &EqualityPolicy) -> Result<Self> {
        let report = is_member(&tensor, space, policy)?;
        if !report.is_member() {
            return Err(report.into_error());
        }
        Ok(CochainElement { tensor, space })
    }

    /// Wrap a tensor known to be a member by construction.
    pub(crate) fn trusted(tensor: Tensor<S>, space: Space) -> Self {
        debug_assert_eq!(tensor.rank(), space.rank());
        CochainElement { tensor, space }
    }

    pub fn zero(dim: usize, space: Space) -> Self {
        CochainElement {
            tensor: Tensor::zeros(dim, space.rank()),
            space,
        }
    }

    pub fn tensor(&self) -> &Tensor<S> {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor<S> {
        self.tensor
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn grade(&self) -> usize {
        self.space.grade()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }
}

/// `(d_∇ C)_{μ₁…μₙ₊₁ ν} = ∇_{[μ₁} C_{μ₂…μₙ₊₁] ν}`: prepend a derivative index
/// and alternate every slot except the trailing one.
pub fn d_nabla<S: ScalarFunction>(t: &Tensor<S>) -> Result<Tensor<S>> {
    if t.rank() == 0 {
        return Err(Error::RankMismatch {
            expected: 1,
            found: 0,
        });
    }
    let leading: Vec<usize> = (0..t.rank()).collect();
    t.nabla().skew_symmetrize(&leading)
}

/// Projection of an arbitrary rank-(q+1) tensor onto K(q).
///
/// q = 0 is the identity and q = 1 symmetrizes; for q ≥ 2 the leading slots
/// are alternated and the total alternation subtracted.
pub fn project_to_k<S: ScalarFunction>(t: &Tensor<S>, q: usize) -> Result<CochainElement<S>> {
    let space = Space::K(q);
    if t.rank() != space.rank() {
        return Err(Error::RankMismatch {
            expected: space.rank(),
            found: t.rank(),
        });
    }
    let projected = match q {
        0 => t.clone(),
        1 => t.symmetrize_pair(0, 1)?,
        _ => {
            let leading: Vec<usize> = (0..q).collect();
            let v = t.skew_symmetrize(&leading)?;
            v.minus(&v.skew_all())
        }
    };
    Ok(CochainElement::trusted(projected, space))
}

fn expect_k<S>(e: &CochainElement<S>) -> Result<usize> {
    match e.space {
        Space::K(q) => Ok(q),
        found => Err(Error::WrongSpace {
            expected: "K",
            found,
        }),
    }
}

fn expect_g<S>(e: &CochainElement<S>) -> Result<usize> {
    match e.space {
        Space::G(q) => Ok(q),
        found => Err(Error::WrongSpace {
            expected: "G",
            found,
        }),
    }
}

/// The differential of the K complex: the Hessian on K(0), `d_∇` above.
pub fn d_k<S: ScalarFunction>(e: &CochainElement<S>) -> Result<CochainElement<S>> {
    let q = expect_k(e)?;
    let out = match q {
        0 => e.tensor.nabla().nabla(),
        _ => d_nabla(&e.tensor)?,
    };
    Ok(CochainElement::trusted(out, Space::K(q + 1)))
}

/// K(q) → G(q): symmetrize the last two slots (identity for q ≤ 1).
pub fn phi<S: ScalarFunction>(e: &CochainElement<S>) -> Result<CochainElement<S>> {
    let q = expect_k(e)?;
    let out = match q {
        0 | 1 => e.tensor.clone(),
        _ => e.tensor.symmetrize_pair(q - 1, q)?,
    };
    Ok(CochainElement::trusted(out, Space::G(q)))
}

/// G(q) → K(q): `2q/(q+1)` times the alternation over the first q slots
/// (identity for q ≤ 1).
pub fn psi<S: ScalarFunction>(e: &CochainElement<S>) -> Result<CochainElement<S>> {
    let q = expect_g(e)?;
    let out = match q {
        0 | 1 => e.tensor.clone(),
        _ => {
            let leading: Vec<usize> = (0..q).collect();
            e.tensor
                .skew_symmetrize(&leading)?
                .scaled(2 * q as i64, q as i64 + 1)
        }
    };
    Ok(CochainElement::trusted(out, Space::K(q)))
}

/// The differential of the G complex, `phi ∘ d_k ∘ psi`.
pub fn d_g<S: ScalarFunction>(e: &CochainElement<S>) -> Result<CochainElement<S>> {
    phi(&d_k(&psi(e)?)?)
}

/// Closed form of `d_g` on G(1):
/// `½ ∂_μ S_{νλ} − ¼ (∂_ν S_{μλ} + ∂_λ S_{μν})`.
pub fn d_g1_explicit<S: ScalarFunction>(e: &CochainElement<S>) -> Result<CochainElement<S>> {
    let q = expect_g(e)?;
    if q != 1 {
        return Err(Error::WrongSpace {
            expected: "G(1)",
            found: e.space,
        });
    }
    let grad = e.tensor.nabla();
    let out = Tensor::from_fn(e.dim(), 3, |i| {
        let (mu, nu, la) = (i[0], i[1], i[2]);
        let first = grad.get(&[mu, nu, la]).scaled(1, 2);
        let rest = grad
            .get(&[nu, mu, la])
            .plus(grad.get(&[la, mu, nu]))
            .scaled(1, 4);
        first.minus(&rest)
    });
    Ok(CochainElement::trusted(out, Space::G(2)))
}

/// For `S ∈ G(n+1)`, n ≥ 1, returns
/// `S − (n+1)/(n+2) · (S_{[μ₁…μₙν]λ} + S_{[μ₁…μₙλ]ν})`, which vanishes for
/// every member.
pub fn reconstruction_residual<S: ScalarFunction>(e: &CochainElement<S>) -> Result<Tensor<S>> {
    let grade = expect_g(e)?;
    if grade < 2 {
        return Err(Error::WrongSpace {
            expected: "G(q) with q >= 2",
            found: e.space,
        });
    }
    let n = grade - 1;
    let leading: Vec<usize> = (0..=n).collect();
    let w = e.tensor.skew_symmetrize(&leading)?;
    let w_swapped = w.swap_slots(n, n + 1)?;
    let rebuilt = w.plus(&w_swapped).scaled(n as i64 + 1, n as i64 + 2);
    Ok(e.tensor.minus(&rebuilt))
}
