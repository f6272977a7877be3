//! Dense covariant tensors over flat `ℝᵈ` and the index-symmetry operators.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{Point, ScalarFunction};
use crate::policy::EqualityPolicy;

/// Rank-`r` tensor in `d` dimensions, stored densely in row-major order
/// (last index fastest). Rank 0 holds a single entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    dim: usize,
    rank: usize,
    entries: Vec<S>,
}

/// Worst entry of a tensor-wide zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub zero: bool,
    pub worst_residual: f64,
    pub index: Option<Vec<usize>>,
    pub point: Option<Point>,
}

impl TensorCheck {
    pub fn passed() -> Self {
        TensorCheck {
            zero: true,
            worst_residual: 0.0,
            index: None,
            point: None,
        }
    }

    /// Keep the worse of two checks; failures dominate passes.
    pub fn merge(self, other: TensorCheck) -> TensorCheck {
        let replace = match (self.zero, other.zero) {
            (true, false) => true,
            (false, true) => false,
            _ => other.worst_residual > self.worst_residual,
        };
        if replace {
            other
        } else {
            self
        }
    }
}

impl<S: ScalarFunction> Tensor<S> {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Tensor {
            dim,
            rank,
            entries: vec![S::zero(dim); dim.pow(rank as u32)],
        }
    }

    pub fn scalar(value: S) -> Self {
        Tensor {
            dim: value.dim(),
            rank: 0,
            entries: vec![value],
        }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let entries = (0..dim.pow(rank as u32))
            .map(|flat| {
                let idx = unflatten(dim, rank, flat);
                let v = f(&idx);
                debug_assert_eq!(v.dim(), dim);
                v
            })
            .collect();
        Tensor { dim, rank, entries }
    }

    /// Build from a flat row-major entry vector.
    pub fn from_entries(dim: usize, rank: usize, entries: Vec<S>) -> Result<Self> {
        let expected = dim.pow(rank as u32);
        if entries.len() != expected {
            return Err(Error::DimMismatch {
                expected,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Tensor { dim, rank, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }

    /// `(index, entry)` pairs in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = (Vec<usize>, &S)> {
        let (dim, rank) = (self.dim, self.rank);
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, e)| (unflatten(dim, rank, i), e))
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "index length must equal rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(
                i < self.dim,
                "index component {i} out of range for dimension {}",
                self.dim
            );
            acc * self.dim + i
        })
    }

    /// Index tuple of the entry stored at row-major offset `flat`.
    pub fn index_of(&self, flat: usize) -> Vec<usize> {
        unflatten(self.dim, self.rank, flat)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: S) {
        assert_eq!(value.dim(), self.dim);
        let o = self.offset(idx);
        self.entries[o] = value;
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Tensor {
            dim: self.dim,
            rank: self.rank,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn map_into<T: ScalarFunction>(&self, f: impl Fn(&S) -> T) -> Tensor<T> {
        Tensor {
            dim: self.dim,
            rank: self.rank,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Fallible entrywise conversion.
    pub fn try_map_into<T: ScalarFunction, E>(
        &self,
        f: impl Fn(&S) -> Result<T, E>,
    ) -> Result<Tensor<T>, E> {
        Ok(Tensor {
            dim: self.dim,
            rank: self.rank,
            entries: self.entries.iter().map(f).collect::<Result<_, E>>()?,
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(
            (self.dim, self.rank),
            (other.dim, other.rank),
            "tensor shape mismatch"
        );
        Tensor {
            dim: self.dim,
            rank: self.rank,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.zip_with(other, S::plus)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.zip_with(other, S::minus)
    }

    pub fn scaled(&self, num: i64, den: i64) -> Self {
        self.map(|e| e.scaled(num, den))
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.entries.iter().all(S::is_structurally_zero)
    }

    /// `out[i₀ … i_{r-1}] = self[i_{perm[0]} … i_{perm[r-1]}]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rank)?;
        let mut src = vec![0; self.rank];
        Ok(Tensor::from_fn(self.dim, self.rank, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[k] = idx[p];
            }
            self.get(&src).clone()
        }))
    }

    pub fn swap_slots(&self, a: usize, b: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..self.rank).collect();
        if a >= self.rank || b >= self.rank {
            return Err(Error::InvalidPositions(format!(
                "({a}, {b}) outside rank {}",
                self.rank
            )));
        }
        perm.swap(a, b);
        self.permute_slots(&perm)
    }

    /// Alternating average over all permutations of the values in
    /// `positions`, normalized by `(#positions)!`. Other slots are untouched.
    pub fn skew_symmetrize(&self, positions: &[usize]) -> Result<Self> {
        check_positions(positions, self.rank)?;
        let m = positions.len();
        if m <= 1 {
            return Ok(self.clone());
        }
        if m > self.dim {
            return Ok(Tensor::zeros(self.dim, self.rank));
        }
        let perms = signed_permutations(m);
        let norm = factorial(m) as i64;
        let mut cache: HashMap<Vec<usize>, S> = HashMap::new();
        let mut src = vec![0; self.rank];
        let entries = (0..self.entries.len())
            .map(|flat| {
                let idx = unflatten(self.dim, self.rank, flat);
                let vals: Vec<usize> = positions.iter().map(|&p| idx[p]).collect();
                let Some((sorted, sign)) = sort_with_sign(&vals) else {
                    return S::zero(self.dim);
                };
                let mut canonical = idx.clone();
                for (&p, &v) in positions.iter().zip(&sorted) {
                    canonical[p] = v;
                }
                let value = cache.entry(canonical.clone()).or_insert_with(|| {
                    let mut acc = S::zero(self.dim);
                    for (perm, s) in &perms {
                        src.copy_from_slice(&canonical);
                        for (j, &p) in positions.iter().enumerate() {
                            src[p] = canonical[positions[perm[j]]];
                        }
                        let term = self.get(&src);
                        if term.is_structurally_zero() {
                            continue;
                        }
                        acc = if *s > 0 {
                            acc.plus(term)
                        } else {
                            acc.minus(term)
                        };
                    }
                    acc.scaled(1, norm)
                });
                if sign > 0 {
                    value.clone()
                } else {
                    value.negated()
                }
            })
            .collect();
        Ok(Tensor {
            dim: self.dim,
            rank: self.rank,
            entries,
        })
    }

    /// Skew-symmetrize over every slot.
    pub fn skew_all(&self) -> Self {
        let all: Vec<usize> = (0..self.rank).collect();
        self.skew_symmetrize(&all)
            .expect("all slots form a valid position set")
    }

    /// `½ (T + T with slots a and b exchanged)`.
    pub fn symmetrize_pair(&self, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidPositions(format!(
                "pair ({a}, {b}) must be distinct"
            )));
        }
        let swapped = self.swap_slots(a, b)?;
        Ok(self.zip_with(&swapped, |x, y| x.plus(y).scaled(1, 2)))
    }

    /// Prepend a derivative index: `out[a, rest] = ∂_a self[rest]`.
    pub fn nabla(&self) -> Self {
        let inner = self.entries.len();
        let mut entries = Vec::with_capacity(inner * self.dim);
        for axis in 0..self.dim {
            entries.extend(self.entries.iter().map(|e| e.partial(axis)));
        }
        Tensor {
            dim: self.dim,
            rank: self.rank + 1,
            entries,
        }
    }

    /// Zero test over all entries, reporting the worst one.
    pub fn check_zero(&self, policy: &EqualityPolicy) -> Result<TensorCheck> {
        let mut out = TensorCheck::passed();
        for (flat, e) in self.entries.iter().enumerate() {
            if e.is_structurally_zero() {
                continue;
            }
            let z = e.zero_check(policy)?;
            if z.zero && z.residual == 0.0 {
                continue;
            }
            out = out.merge(TensorCheck {
                zero: z.zero,
                worst_residual: z.residual,
                index: Some(unflatten(self.dim, self.rank, flat)),
                point: z.witness,
            });
        }
        Ok(out)
    }
}

/// The cycle `k ↦ k + power (mod size)` acting on slot positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicPermutation {
    size: usize,
    power: usize,
}

impl CyclicPermutation {
    pub fn new(size: usize, power: usize) -> Self {
        assert!(size > 0, "cyclic permutation needs at least one slot");
        CyclicPermutation {
            size,
            power: power % size,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn power(&self) -> usize {
        self.power
    }

    /// Image of slot `k` (zero-based).
    pub fn apply(&self, k: usize) -> usize {
        (k + self.power) % self.size
    }

    pub fn compose(&self, other: &CyclicPermutation) -> CyclicPermutation {
        assert_eq!(self.size, other.size);
        CyclicPermutation::new(self.size, self.power + other.power)
    }

    /// Slot order `[τ(0), …, τ(size-1)]`, usable with [`Tensor::permute_slots`].
    pub fn slot_order(&self) -> Vec<usize> {
        (0..self.size).map(|k| self.apply(k)).collect()
    }
}

pub(crate) fn unflatten(dim: usize, rank: usize, mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % dim;
        flat /= dim;
    }
    idx
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All permutations of `0..m` with their signs.
pub(crate) fn signed_permutations(m: usize) -> Vec<(Vec<usize>, i32)> {
    (0..m)
        .permutations(m)
        .map(|p| {
            let inversions = (0..m)
                .tuple_combinations()
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            (p, sign)
        })
        .collect()
}

/// Sorted copy and the sign of the sorting permutation; `None` on repeats.
fn sort_with_sign(vals: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = vals.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

fn check_positions(positions: &[usize], rank: usize) -> Result<()> {
    if let Some(&p) = positions.iter().find(|&&p| p >= rank) {
        return Err(Error::InvalidPositions(format!(
            "position {p} outside rank {rank}"
        )));
    }
    if positions.iter().duplicates().next().is_some() {
        return Err(Error::InvalidPositions(format!(
            "{positions:?} contains repeats"
        )));
    }
    Ok(())
}

fn check_permutation(perm: &[usize], rank: usize) -> Result<()> {
    if perm.len() != rank {
        return Err(Error::InvalidPositions(format!(
            "permutation {perm:?} has wrong length for rank {rank}"
        )));
    }
    check_positions(perm, rank)
}
