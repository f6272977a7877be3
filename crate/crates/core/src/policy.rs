//! Seeded sampling policy used wherever equality cannot be decided exactly.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{integer, Point};

/// Where sample points are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleDomain {
    /// Integer points with every coordinate in `[-half_width, half_width]`.
    IntegerBox { half_width: i64 },
    /// Integer points whose coordinates on `axes` have a nonzero perfect-square
    /// squared norm, so radii over those axes are rational; remaining
    /// coordinates are uniform in the box.
    PerfectSquareRadius { axes: Vec<usize>, half_width: i64 },
}

/// How to decide equality of fields that have no exact normal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityPolicy {
    pub sample_count: usize,
    pub seed: u64,
    /// Relative tolerance on `|a - b| / max(1, |a|, |b|)`.
    pub tol: f64,
    pub domain: SampleDomain,
}

impl Default for EqualityPolicy {
    fn default() -> Self {
        EqualityPolicy {
            sample_count: 8,
            seed: 0,
            tol: 1e-9,
            domain: SampleDomain::IntegerBox { half_width: 5 },
        }
    }
}

impl EqualityPolicy {
    pub fn new(sample_count: usize, seed: u64, tol: f64, domain: SampleDomain) -> Result<Self> {
        let policy = EqualityPolicy {
            sample_count,
            seed,
            tol,
            domain,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Policy for spatial fields in four dimensions: radii over `x1..x3` are
    /// rational, `x0` is free.
    pub fn spacetime(sample_count: usize, seed: u64, tol: f64) -> Result<Self> {
        Self::new(
            sample_count,
            seed,
            tol,
            SampleDomain::PerfectSquareRadius {
                axes: vec![1, 2, 3],
                half_width: 9,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::BadParameter(
                "sample_count must be at least 1".into(),
            ));
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(Error::BadParameter(
                "tol must be a finite non-negative number".into(),
            ));
        }
        let half_width = match &self.domain {
            SampleDomain::IntegerBox { half_width } => *half_width,
            SampleDomain::PerfectSquareRadius { axes, half_width } => {
                if axes.is_empty() {
                    return Err(Error::BadParameter(
                        "perfect-square domain needs at least one axis".into(),
                    ));
                }
                *half_width
            }
        };
        if half_width < 1 {
            return Err(Error::BadParameter("half_width must be positive".into()));
        }
        Ok(())
    }

    /// Infinite deterministic stream of candidate points in `dim` dimensions.
    pub fn candidate_points(&self, dim: usize) -> Result<impl Iterator<Item = Point>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (half_width, axes, shells) = match &self.domain {
            SampleDomain::IntegerBox { half_width } => (*half_width, Vec::new(), Vec::new()),
            SampleDomain::PerfectSquareRadius { axes, half_width } => {
                if let Some(&bad) = axes.iter().find(|&&a| a >= dim) {
                    return Err(Error::AxisOutOfRange { axis: bad, dim });
                }
                (
                    *half_width,
                    axes.clone(),
                    perfect_square_tuples(axes.len(), *half_width),
                )
            }
        };
        Ok(std::iter::repeat_with(move || {
            let mut coords: Vec<i64> = (0..dim)
                .map(|_| rng.random_range(-half_width..=half_width))
                .collect();
            if !shells.is_empty() {
                let tuple = &shells[rng.random_range(0..shells.len())];
                for (&axis, &c) in axes.iter().zip(tuple) {
                    coords[axis] = c;
                }
            }
            Point::new(coords.into_iter().map(integer).collect())
        }))
    }

    /// `sample_count` points accepted by `admissible`, in stream order.
    pub fn sample_points(
        &self,
        dim: usize,
        admissible: impl Fn(&Point) -> bool,
    ) -> Result<Vec<Point>> {
        let attempts = self.sample_count.saturating_mul(64);
        let points: Vec<Point> = self
            .candidate_points(dim)?
            .take(attempts)
            .filter(|p| admissible(p))
            .take(self.sample_count)
            .collect();
        if points.len() < self.sample_count {
            return Err(Error::BadParameter(format!(
                "only {} of {} admissible sample points found",
                points.len(),
                self.sample_count
            )));
        }
        Ok(points)
    }
}

/// All integer tuples of length `k` in the box with a nonzero perfect-square
/// squared norm, in lexicographic order.
fn perfect_square_tuples(k: usize, half_width: i64) -> Vec<Vec<i64>> {
    let side = (2 * half_width + 1) as usize;
    let total = side.pow(k as u32);
    let mut out = Vec::new();
    for n in 0..total {
        let mut rem = n;
        let tuple: Vec<i64> = (0..k)
            .map(|_| {
                let c = (rem % side) as i64 - half_width;
                rem /= side;
                c
            })
            .collect();
        let norm: i64 = tuple.iter().map(|c| c * c).sum();
        if norm == 0 {
            continue;
        }
        let root = BigInt::from(norm).sqrt();
        if &root * &root == BigInt::from(norm) {
            out.push(tuple);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_stream_is_deterministic() {
        let p = EqualityPolicy::default();
        let a: Vec<Point> = p.candidate_points(3).unwrap().take(10).collect();
        let b: Vec<Point> = p.candidate_points(3).unwrap().take(10).collect();
        assert_eq!(a, b);
        let other = EqualityPolicy { seed: 1, ..p };
        let c: Vec<Point> = other.candidate_points(3).unwrap().take(10).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn perfect_square_points_have_rational_radius() {
        let p = EqualityPolicy::spacetime(50, 3, 1e-9).unwrap();
        for pt in p.sample_points(4, |_| true).unwrap() {
            let c = pt.to_f64();
            let r2 = c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
            let r = r2.sqrt();
            assert!(r2 > 0.0);
            assert_eq!(r, r.round(), "radius of {pt} is not an integer");
        }
    }

    #[test]
    fn tuples_include_classic_quadruples() {
        let t = perfect_square_tuples(3, 9);
        for q in [[1, 2, 2], [2, 3, 6], [1, 4, 8], [0, 0, 5]] {
            assert!(t.contains(&q.to_vec()));
        }
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(
            EqualityPolicy::new(0, 0, 1e-9, SampleDomain::IntegerBox { half_width: 5 }).is_err()
        );
        assert!(
            EqualityPolicy::new(1, 0, -1.0, SampleDomain::IntegerBox { half_width: 5 }).is_err()
        );
        assert!(
            EqualityPolicy::new(1, 0, f64::NAN, SampleDomain::IntegerBox { half_width: 5 })
                .is_err()
        );
        let p = EqualityPolicy::spacetime(1, 0, 1e-9).unwrap();
        assert!(matches!(
            p.candidate_points(3),
            Err(Error::AxisOutOfRange { axis: 3, dim: 3 })
        ));
    }
}
