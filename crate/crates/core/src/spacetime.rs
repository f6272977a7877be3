//! Static isotropic metrics `f(H) dt² − g(H) dx⃗²` on ℝ⁴.
//!
//! Coordinate 0 is `t`; `H` is a field over `x1..x3`. The profile functions
//! `f` and `g` are one-variable expressions whose variable is `x0`, which is
//! substituted by `H` on composition. Christoffel symbols are lowered with
//! the flat background `η = diag(+1, −1, −1, −1)`, never with the metric
//! itself.

use num_traits::{Signed, Zero};

use crate::complex::{d_g, is_member, CochainElement, MembershipReport, Space};
use crate::error::{Error, Result};
use crate::field::expr::Expr;
use crate::field::scalar::{ScalarField, ScalarFunction};
use crate::field::{integer, rational, relative_residual, Point, Rational};
use crate::policy::EqualityPolicy;
use crate::report::{CheckRecord, VerificationReport, Witness};
use crate::tensor::Tensor;

pub const DIM: usize = 4;
pub const SIGNATURE: [i64; DIM] = [1, -1, -1, -1];

type FieldTensor = Tensor<ScalarField>;

fn field(e: Expr) -> ScalarField {
    ScalarField::from_expr(e, DIM).expect("spacetime expressions only use x0..x3")
}

fn half(e: Expr) -> Expr {
    Expr::scale(rational(1, 2), e)
}

fn quarter(e: Expr) -> Expr {
    Expr::scale(rational(1, 4), e)
}

/// The flat background `η` as a rank-2 tensor.
pub fn eta() -> FieldTensor {
    Tensor::from_fn(DIM, 2, |i| {
        if i[0] == i[1] {
            ScalarField::constant(DIM, integer(SIGNATURE[i[0]]))
        } else {
            ScalarField::zero(DIM)
        }
    })
}

/// Parameters for the metrics known by name.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    /// `f = H⁻²`, `g = H²`; `H` defaults to `1 + 1/r`.
    Mp {
        h: Option<Expr>,
    },
    /// The `Mp` profile with `H = 1 + mass/r`.
    ExtremeRn {
        mass: Rational,
    },
    /// `H = 1 − ω/(4ρ)`, `f = (2 − H)² H⁻²`, `g = H⁴`.
    Schwarzschild {
        omega: Rational,
    },
    Flat,
    Custom {
        f: Expr,
        g: Expr,
        h: Expr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicMetric {
    name: String,
    f: Expr,
    g: Expr,
    h: Expr,
    u_closed_form: Option<Expr>,
}

impl IsotropicMetric {
    /// `f` and `g` may only use `x0` (standing for `H`); `h` may only use
    /// `x1..x3`.
    pub fn new(name: impl Into<String>, f: Expr, g: Expr, h: Expr) -> Result<Self> {
        for (label, e) in [("f", &f), ("g", &g)] {
            if let Some(&axis) = e.coordinates().iter().find(|&&a| a != 0) {
                return Err(Error::BadParameter(format!(
                    "{label} must be a function of H alone, found x{axis}"
                )));
            }
            if e.is_zero() {
                return Err(Error::BadParameter(format!("{label} vanishes identically")));
            }
            if e.contains_formal_primitive() {
                return Err(Error::BadParameter(format!("{label} must be evaluable")));
            }
        }
        let coords = h.coordinates();
        if coords.contains(&0) {
            return Err(Error::BadParameter("H must not depend on t".into()));
        }
        if let Some(&axis) = coords.iter().find(|&&a| a >= DIM) {
            return Err(Error::AxisOutOfRange { axis, dim: DIM });
        }
        if h.contains_formal_primitive() {
            return Err(Error::BadParameter("H must be evaluable".into()));
        }
        Ok(IsotropicMetric {
            name: name.into(),
            f,
            g,
            h,
            u_closed_form: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Profile `f` in the variable `x0 = H`.
    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn h_field(&self) -> ScalarField {
        field(self.h.clone())
    }

    /// Compose a profile expression in `H` with the spatial field `H`.
    pub fn compose(&self, profile: &Expr) -> Expr {
        profile.substitute(std::slice::from_ref(&self.h))
    }

    pub fn f_of_h(&self) -> Expr {
        self.compose(&self.f)
    }

    pub fn g_of_h(&self) -> Expr {
        self.compose(&self.g)
    }

    /// The metric `diag(f(H), −g(H), −g(H), −g(H))`.
    pub fn metric_tensor(&self) -> FieldTensor {
        let diag = self.diagonal();
        Tensor::from_fn(DIM, 2, |i| {
            if i[0] == i[1] {
                field(diag[i[0]].clone())
            } else {
                ScalarField::zero(DIM)
            }
        })
    }

    fn diagonal(&self) -> [Expr; DIM] {
        let f = self.f_of_h();
        let g = Expr::negate(self.g_of_h());
        [f, g.clone(), g.clone(), g]
    }

    /// Whether the metric profiles and the potential are finite and
    /// nondegenerate at `point`.
    fn regular_at(&self, point: &Point, checks: &[Expr]) -> bool {
        checks
            .iter()
            .enumerate()
            .all(|(k, e)| match e.evaluate(point) {
                Ok(v) => k >= 2 || v.to_f64() != 0.0,
                Err(_) => false,
            })
    }

    /// Seeded sample points at which `f(H)`, `g(H)` and `u′(H)` are all
    /// regular and the metric is nondegenerate.
    pub fn sample_points(&self, policy: &EqualityPolicy) -> Result<Vec<Point>> {
        let checks = [
            self.f_of_h(),
            self.g_of_h(),
            self.compose(&u_prime(&self.f, &self.g)),
        ];
        let mut points = Vec::with_capacity(policy.sample_count);
        let mut rejected = None;
        for p in policy
            .candidate_points(DIM)?
            .take(policy.sample_count.saturating_mul(64))
        {
            if self.regular_at(&p, &checks) {
                points.push(p);
                if points.len() == policy.sample_count {
                    return Ok(points);
                }
            } else if rejected.is_none() {
                rejected = Some(p);
            }
        }
        Err(Error::SingularMetric {
            point: rejected.unwrap_or_else(|| Point::origin(DIM)),
        })
    }
}

/// Build one of the named metrics.
pub fn builtin_metric(kind: MetricKind) -> Result<IsotropicMetric> {
    let var = Expr::coord(0);
    let inverse_radius = || Expr::pow(Expr::radius(&[1, 2, 3]), -1);
    let mp = |name: &str, h: Expr| -> Result<IsotropicMetric> {
        let mut m = IsotropicMetric::new(
            name,
            Expr::pow(var.clone(), -2),
            Expr::pow(var.clone(), 2),
            h,
        )?;
        m.u_closed_form = Some(Expr::sum(vec![
            Expr::scale(rational(4, 3), Expr::log(var.clone())),
            Expr::scale(rational(-1, 3), Expr::pow(var.clone(), -4)),
        ]));
        Ok(m)
    };
    let positive = |label: &str, c: &Rational| -> Result<()> {
        if c.is_positive() {
            Ok(())
        } else {
            Err(Error::BadParameter(format!(
                "{label} must be a positive rational, got {c}"
            )))
        }
    };
    match kind {
        MetricKind::Mp { h } => mp(
            "mp",
            h.unwrap_or_else(|| Expr::sum(vec![Expr::one(), inverse_radius()])),
        ),
        MetricKind::ExtremeRn { mass } => {
            positive("mass", &mass)?;
            mp(
                "extreme_rn",
                Expr::sum(vec![Expr::one(), Expr::scale(mass, inverse_radius())]),
            )
        }
        MetricKind::Schwarzschild { omega } => {
            positive("omega", &omega)?;
            let h = Expr::sum(vec![
                Expr::one(),
                Expr::scale(-omega / integer(4), inverse_radius()),
            ]);
            let two_minus = Expr::difference(Expr::int(2), var.clone());
            let f = Expr::product(vec![Expr::pow(two_minus, 2), Expr::pow(var.clone(), -2)]);
            IsotropicMetric::new("schwarzschild", f, Expr::pow(var, 4), h)
        }
        MetricKind::Flat => IsotropicMetric::new("flat", Expr::one(), Expr::one(), Expr::one()),
        MetricKind::Custom { f, g, h } => IsotropicMetric::new("custom", f, g, h),
    }
}

/// `Γ_{μνλ} = η_{μμ} Γ^μ_{νλ}` with `Γ^τ_{νλ}` from the Levi-Civita formula
/// for the diagonal metric.
pub fn christoffel_lowered(m: &IsotropicMetric) -> FieldTensor {
    let diag = m.diagonal();
    // d[a][b] = ∂_a g_bb
    let d: Vec<Vec<Expr>> = (0..DIM)
        .map(|a| diag.iter().map(|gbb| gbb.differentiate(a)).collect())
        .collect();
    Tensor::from_fn(DIM, 3, |i| {
        let (tau, nu, la) = (i[0], i[1], i[2]);
        let mut terms = Vec::new();
        if tau == la {
            terms.push(d[nu][tau].clone());
        }
        if tau == nu {
            terms.push(d[la][tau].clone());
        }
        if nu == la {
            terms.push(Expr::negate(d[tau][nu].clone()));
        }
        let bracket = Expr::sum(terms);
        if bracket.is_zero() {
            return ScalarField::zero(DIM);
        }
        let raised = half(Expr::quotient(bracket, diag[tau].clone()));
        field(Expr::scale(integer(SIGNATURE[tau]), raised))
    })
}

/// Index families of the closed-form tables. Every index not listed is
/// zero in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `(t, j, t)` and `(t, t, j)`.
    TimeTimeSpace,
    /// `(j, t, t)`.
    SpaceTimeTime,
    /// `(k, j, k)` and `(k, k, j)`.
    RepeatedOuter,
    /// `(j, k, k)` with `j ≠ k`.
    RepeatedInner,
    Vanishing,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::TimeTimeSpace,
        Family::SpaceTimeTime,
        Family::RepeatedOuter,
        Family::RepeatedInner,
        Family::Vanishing,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Family::TimeTimeSpace => "t j t, t t j",
            Family::SpaceTimeTime => "j t t",
            Family::RepeatedOuter => "k j k, k k j",
            Family::RepeatedInner => "j k k (j != k)",
            Family::Vanishing => "remaining entries vanish",
        }
    }

    /// Family of `idx`. `outer_diagonal` says whether `(j, j, j)` belongs to
    /// the repeated-outer family (true for Γ, false for F).
    pub fn of(idx: &[usize], outer_diagonal: bool) -> Family {
        match (idx[0], idx[1], idx[2]) {
            (0, j, 0) | (0, 0, j) if j != 0 => Family::TimeTimeSpace,
            (j, 0, 0) if j != 0 => Family::SpaceTimeTime,
            (a, b, c) if a != 0 && b != 0 && c != 0 => {
                if a == b && b == c {
                    if outer_diagonal {
                        Family::RepeatedOuter
                    } else {
                        Family::Vanishing
                    }
                } else if a == c || a == b {
                    Family::RepeatedOuter
                } else if b == c {
                    Family::RepeatedInner
                } else {
                    Family::Vanishing
                }
            }
            _ => Family::Vanishing,
        }
    }
}

/// Spatial derivative index of a family member, or `None` for vanishing
/// entries.
fn derivative_axis(idx: &[usize], family: Family) -> Option<usize> {
    match family {
        Family::TimeTimeSpace => Some(idx[1].max(idx[2])),
        Family::SpaceTimeTime | Family::RepeatedInner => Some(idx[0]),
        // (k, j, k) or (k, k, j): j is the slot that differs from the first.
        Family::RepeatedOuter => Some(if idx[1] == idx[0] { idx[2] } else { idx[1] }),
        Family::Vanishing => None,
    }
}

/// The closed-form Christoffel table for `f(H) dt² − g(H) dx⃗²`.
pub fn christoffel_table(m: &IsotropicMetric) -> FieldTensor {
    let log_f = Expr::log(m.f_of_h());
    let log_g = Expr::log(m.g_of_h());
    let f = m.f_of_h();
    let g = m.g_of_h();
    Tensor::from_fn(DIM, 3, |idx| {
        let family = Family::of(idx, true);
        let Some(j) = derivative_axis(idx, family) else {
            return ScalarField::zero(DIM);
        };
        let e = match family {
            Family::TimeTimeSpace => half(log_f.differentiate(j)),
            Family::SpaceTimeTime => Expr::negate(Expr::quotient(
                f.differentiate(j),
                Expr::scale(integer(2), g.clone()),
            )),
            Family::RepeatedOuter => Expr::negate(half(log_g.differentiate(j))),
            Family::RepeatedInner => half(log_g.differentiate(j)),
            Family::Vanishing => unreachable!(),
        };
        field(e)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionDecomposition {
    pub gamma_lowered: FieldTensor,
    pub symmetric_part: FieldTensor,
    pub field_strength: CochainElement<ScalarField>,
}

fn split_connection(
    gamma: &FieldTensor,
    policy: &EqualityPolicy,
) -> Result<(ConnectionDecomposition, MembershipReport)> {
    if gamma.rank() != 3 {
        return Err(Error::RankMismatch {
            expected: 3,
            found: gamma.rank(),
        });
    }
    let asym = gamma.minus(&gamma.swap_slots(1, 2)?).check_zero(policy)?;
    if !asym.zero {
        return Err(Error::NotConnectionShaped {
            index: asym.index.unwrap_or_default(),
        });
    }
    let mut sum = Tensor::zeros(gamma.dim(), 3);
    for perm in [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ] {
        sum = sum.plus(&gamma.permute_slots(&perm)?);
    }
    let symmetric_part = sum.scaled(1, 6);
    let f = gamma.minus(&symmetric_part);
    let report = is_member(&f, Space::G(2), policy)?;
    let decomposition = ConnectionDecomposition {
        gamma_lowered: gamma.clone(),
        symmetric_part,
        field_strength: CochainElement::trusted(f, Space::G(2)),
    };
    Ok((decomposition, report))
}

/// `Γ = Γ_(μνλ) + F` with `Γ_(μνλ)` the average over all six slot orders.
pub fn symmetric_free_part(
    gamma: &FieldTensor,
    policy: &EqualityPolicy,
) -> Result<ConnectionDecomposition> {
    let (decomposition, report) = split_connection(gamma, policy)?;
    if !report.is_member() {
        return Err(report.into_error());
    }
    Ok(decomposition)
}

/// `u′ = −2f′/(3f) − 2f′/(3g)` in the variable `H`.
fn u_prime(f: &Expr, g: &Expr) -> Expr {
    let fp = f.differentiate(0);
    Expr::sum(vec![
        Expr::scale(rational(-2, 3), Expr::quotient(fp.clone(), f.clone())),
        Expr::scale(rational(-2, 3), Expr::quotient(fp, g.clone())),
    ])
}

/// `A = u(H) dt² + v(H) dx⃗²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub a: CochainElement<ScalarField>,
    /// `u′` in the variable `H` (`x0`).
    pub u_prime: Expr,
    /// `v = (4/3) log g` in the variable `H`.
    pub v: Expr,
    /// A closed-form `u` in the variable `H`, where one is known.
    pub u_closed_form: Option<Expr>,
}

impl Potential {
    /// `u ∘ H`, known only through its derivative.
    pub fn u_of_h(&self) -> &ScalarField {
        self.a.tensor().get(&[0, 0])
    }

    pub fn v_of_h(&self) -> &ScalarField {
        self.a.tensor().get(&[1, 1])
    }
}

pub fn build_potential(m: &IsotropicMetric) -> Potential {
    let u_prime = u_prime(&m.f, &m.g);
    let v = Expr::scale(rational(4, 3), Expr::log(m.g.clone()));
    let u_of_h = field(Expr::formal_primitive(m.compose(&u_prime), m.h.clone()));
    let v_of_h = field(m.compose(&v));
    let a = Tensor::from_fn(DIM, 2, |i| match (i[0], i[1]) {
        (0, 0) => u_of_h.clone(),
        (a, b) if a == b => v_of_h.clone(),
        _ => ScalarField::zero(DIM),
    });
    Potential {
        a: CochainElement::trusted(a, Space::G(1)),
        u_prime,
        v,
        u_closed_form: m.u_closed_form.clone(),
    }
}

/// The closed-form table of `F` in terms of `u(H)` and `v(H)`.
pub fn field_strength_table(potential: &Potential) -> FieldTensor {
    let u = potential.u_of_h().to_expr();
    let v = potential.v_of_h().to_expr();
    Tensor::from_fn(DIM, 3, |idx| {
        let family = Family::of(idx, false);
        let Some(j) = derivative_axis(idx, family) else {
            return ScalarField::zero(DIM);
        };
        let e = match family {
            Family::TimeTimeSpace => Expr::negate(quarter(u.differentiate(j))),
            Family::SpaceTimeTime => half(u.differentiate(j)),
            Family::RepeatedOuter => Expr::negate(quarter(v.differentiate(j))),
            Family::RepeatedInner => half(v.differentiate(j)),
            Family::Vanishing => unreachable!(),
        };
        field(e)
    })
}

/// Worst relative residual between two tensors over `points`, restricted
/// to the indices accepted by `select`.
fn pointwise_residual(
    a: &FieldTensor,
    b: &FieldTensor,
    points: &[Point],
    select: impl Fn(&[usize]) -> bool,
) -> Result<(f64, Option<Witness>)> {
    let mut worst = 0.0;
    let mut witness = None;
    for (idx, x) in a.indexed() {
        if !select(&idx) {
            continue;
        }
        let y = b.get(&idx);
        if x.is_structurally_zero() && y.is_structurally_zero() {
            continue;
        }
        for p in points {
            let r = relative_residual(&x.evaluate(p)?, &y.evaluate(p)?);
            if r > worst || (witness.is_none() && r > 0.0) {
                worst = r;
                witness = Some(Witness {
                    trial: None,
                    index: idx.clone(),
                    point: Some(p.labels()),
                });
            }
        }
    }
    Ok((worst, witness))
}

fn membership_records(report: &MembershipReport, prefix: &str) -> Vec<CheckRecord> {
    report
        .checks
        .iter()
        .map(|c| CheckRecord::from_tensor_check(format!("{prefix}: {}", c.name), &c.result, None))
        .collect()
}

/// Check `F = d_G A` componentwise at the policy's sample points.
pub fn verify_potential(
    m: &IsotropicMetric,
    policy: &EqualityPolicy,
) -> Result<VerificationReport> {
    let points = m.sample_points(policy)?;
    let (decomposition, membership) = split_connection(&christoffel_lowered(m), policy)?;
    let potential = build_potential(m);
    let dga = d_g(&potential.a)?;
    let mut report = VerificationReport::new(format!("spacetime verify {}", m.name()));
    for record in membership_records(&membership, "F in G(2)") {
        report.push(record);
    }
    let (worst, witness) = pointwise_residual(
        decomposition.field_strength.tensor(),
        dga.tensor(),
        &points,
        |_| true,
    )?;
    report.push(CheckRecord::new(
        "F = d_G A",
        worst <= policy.tol,
        worst,
        witness,
    ));
    Ok(report)
}

/// Compare the computed Γ and F with their closed-form tables, one check
/// per index family.
pub fn table_report(m: &IsotropicMetric, policy: &EqualityPolicy) -> Result<VerificationReport> {
    let points = m.sample_points(policy)?;
    let gamma = christoffel_lowered(m);
    let gamma_table = christoffel_table(m);
    let (decomposition, _) = split_connection(&gamma, policy)?;
    let f_table = field_strength_table(&build_potential(m));
    let mut report = VerificationReport::new(format!("spacetime table {}", m.name()));
    for (symbol, computed, table, outer_diagonal) in [
        ("Gamma", &gamma, &gamma_table, true),
        ("F", decomposition.field_strength.tensor(), &f_table, false),
    ] {
        for family in Family::ALL {
            let (worst, witness) = pointwise_residual(computed, table, &points, |idx| {
                Family::of(idx, outer_diagonal) == family
            })?;
            report.push(CheckRecord::new(
                format!("{symbol} {}", family.label()),
                worst <= policy.tol,
                worst,
                witness,
            ));
        }
    }
    Ok(report)
}

/// Evaluate the spatial Laplacian `Σⱼ ∂ⱼ∂ⱼ H` at the policy's sample points.
/// Informational: nothing else in this module requires `H` to be harmonic.
pub fn check_harmonic(h: &ScalarField, policy: &EqualityPolicy) -> Result<VerificationReport> {
    let dim = ScalarFunction::dim(h);
    if dim != DIM {
        return Err(Error::DimMismatch {
            expected: DIM,
            found: dim,
        });
    }
    if !h.partial(0).is_structurally_zero() {
        return Err(Error::BadParameter("H must not depend on t".into()));
    }
    let mut laplacian = ScalarField::zero(DIM);
    for j in 1..DIM {
        laplacian = laplacian.plus(&h.partial(j).partial(j));
    }
    let points = policy.sample_points(DIM, |p| laplacian.evaluate(p).is_ok())?;
    let mut worst: f64 = 0.0;
    let mut witness = None;
    for p in &points {
        let r = laplacian.evaluate(p)?.to_f64().abs();
        if r > worst || (witness.is_none() && !r.is_zero()) {
            worst = r;
            witness = Some(Witness {
                trial: None,
                index: Vec::new(),
                point: Some(p.labels()),
            });
        }
    }
    let mut report = VerificationReport::new(format!("harmonic {h}"));
    report.push(CheckRecord::new(
        "laplacian vanishes",
        worst <= policy.tol,
        worst,
        witness,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Value;

    fn at(point: [i64; 4]) -> Point {
        Point::from_ints(&point)
    }

    fn exact(f: &ScalarField, p: &Point) -> Rational {
        match f.evaluate(p).unwrap() {
            Value::Exact(r) => r,
            Value::Approx(x) => panic!("expected an exact value, got {x}"),
        }
    }

    fn mp() -> IsotropicMetric {
        builtin_metric(MetricKind::Mp { h: None }).unwrap()
    }

    fn policy(samples: usize) -> EqualityPolicy {
        EqualityPolicy::spacetime(samples, 5, 1e-9).unwrap()
    }

    #[test]
    fn eta_has_lorentzian_signature() {
        let e = eta();
        let p = Point::origin(4);
        assert_eq!(exact(e.get(&[0, 0]), &p), integer(1));
        assert_eq!(exact(e.get(&[2, 2]), &p), integer(-1));
        assert!(e.get(&[0, 1]).is_structurally_zero());
    }

    #[test]
    fn builtin_h_values() {
        let p = at([0, 1, 2, 2]);
        let rn = builtin_metric(MetricKind::ExtremeRn { mass: integer(1) }).unwrap();
        assert_eq!(exact(&rn.h_field(), &p), rational(4, 3));
        let s = builtin_metric(MetricKind::Schwarzschild { omega: integer(4) }).unwrap();
        // H = 1 − 1/ρ, g = H⁴
        assert_eq!(exact(&s.h_field(), &p), rational(2, 3));
        assert_eq!(exact(&field(s.g_of_h()), &p), rational(16, 81));
    }

    #[test]
    fn builtin_rejects_non_positive_parameters() {
        assert!(matches!(
            builtin_metric(MetricKind::ExtremeRn { mass: integer(0) }),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            builtin_metric(MetricKind::Schwarzschild { omega: integer(-4) }),
            Err(Error::BadParameter(_))
        ));
        let t_dependent = MetricKind::Custom {
            f: Expr::one(),
            g: Expr::one(),
            h: Expr::coord(0),
        };
        assert!(builtin_metric(t_dependent).is_err());
    }

    #[test]
    fn mp_christoffel_spot_value() {
        let gamma = christoffel_lowered(&mp());
        assert_eq!(
            exact(gamma.get(&[0, 1, 0]), &at([0, 1, 2, 2])),
            rational(1, 36)
        );
    }

    #[test]
    fn flat_metric_has_no_connection() {
        let flat = builtin_metric(MetricKind::Flat).unwrap();
        assert!(christoffel_lowered(&flat).is_structurally_zero());
        let pot = build_potential(&flat);
        assert!(pot.u_prime.is_zero());
        assert!(pot.v.is_zero());
        assert!(verify_potential(&flat, &policy(4)).unwrap().passed());
    }

    #[test]
    fn lowering_uses_eta_not_the_metric() {
        // Γ_{jtt} = η_jj Γ^j_tt = −(−½ g^{jj} ∂_j f) with g^{jj} = −1/g.
        let m = mp();
        let gamma = christoffel_lowered(&m);
        let p = at([0, 1, 2, 2]);
        let h = rational(4, 3);
        let dh = rational(-1, 27);
        // f = H⁻², ∂₁f = −2H⁻³ ∂₁H, g = H²
        let d1f = integer(-2) * num_traits::pow(h.recip(), 3) * &dh;
        let expected = -d1f / (integer(2) * &h * &h);
        assert_eq!(exact(gamma.get(&[1, 0, 0]), &p), expected);
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        let m = builtin_metric(MetricKind::Schwarzschild { omega: integer(4) }).unwrap();
        let gamma = christoffel_lowered(&m);
        let diag = m.diagonal();
        let x = [0.0, 1.5, 2.25, -1.75];
        let step = 1e-5;
        let deriv = |e: &Expr, axis: usize| {
            let mut lo = x;
            let mut hi = x;
            lo[axis] -= step;
            hi[axis] += step;
            (e.evaluate_float(&hi).unwrap() - e.evaluate_float(&lo).unwrap()) / (2.0 * step)
        };
        for tau in 0..4 {
            for nu in 0..4 {
                for la in 0..4 {
                    let mut bracket = 0.0;
                    if tau == la {
                        bracket += deriv(&diag[tau], nu);
                    }
                    if tau == nu {
                        bracket += deriv(&diag[tau], la);
                    }
                    if nu == la {
                        bracket -= deriv(&diag[nu], tau);
                    }
                    let g_tt: f64 = diag[tau].evaluate_float(&x).unwrap();
                    let want = SIGNATURE[tau] as f64 * 0.5 * bracket / g_tt;
                    let got: f64 = gamma
                        .get(&[tau, nu, la])
                        .to_expr()
                        .evaluate_float(&x)
                        .unwrap();
                    assert!(
                        (got - want).abs() < 1e-6,
                        "Γ[{tau},{nu},{la}]: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn christoffel_matches_closed_form_table() {
        for kind in [
            MetricKind::Mp { h: None },
            MetricKind::Schwarzschild { omega: integer(4) },
        ] {
            let m = builtin_metric(kind).unwrap();
            let r = table_report(&m, &policy(10)).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn mp_field_strength_spot_values() {
        let m = mp();
        let dec = symmetric_free_part(&christoffel_lowered(&m), &policy(4)).unwrap();
        let p = at([0, 1, 2, 2]);
        let f = dec.field_strength.tensor();
        assert_eq!(exact(f.get(&[1, 0, 0]), &p), rational(-337, 13824));
        assert_eq!(exact(f.get(&[1, 2, 2]), &p), rational(-1, 27));
        assert_eq!(exact(f.get(&[1, 1, 1]), &p), integer(0));
    }

    #[test]
    fn fully_symmetric_connection_has_no_field_strength() {
        let x = |a| ScalarField::coordinate(4, a);
        let gamma = Tensor::from_fn(4, 3, |i| x(i[0]).times(&x(i[1])).times(&x(i[2])));
        let dec = symmetric_free_part(&gamma, &EqualityPolicy::default()).unwrap();
        assert!(dec.field_strength.tensor().is_structurally_zero());
    }

    #[test]
    fn asymmetric_connection_is_rejected() {
        let mut gamma: FieldTensor = Tensor::zeros(4, 3);
        gamma.set(&[0, 1, 2], ScalarField::constant(4, integer(1)));
        assert!(matches!(
            symmetric_free_part(&gamma, &EqualityPolicy::default()),
            Err(Error::NotConnectionShaped { .. })
        ));
    }

    #[test]
    fn mp_potential_profiles() {
        let m = mp();
        let pot = build_potential(&m);
        let one_var = EqualityPolicy::default();
        let h = Expr::coord(0);
        let expected_u_prime = Expr::scale(
            rational(4, 3),
            Expr::sum(vec![Expr::pow(h.clone(), -1), Expr::pow(h.clone(), -5)]),
        );
        let lhs = ScalarField::expr(pot.u_prime.clone(), 1);
        assert!(lhs
            .equals(&ScalarField::expr(expected_u_prime, 1), &one_var)
            .unwrap());
        let expected_v = Expr::scale(rational(8, 3), Expr::log(h));
        let v = ScalarField::expr(pot.v.clone(), 1);
        // log only evaluates on H > 0, so compare derivatives
        assert!(v
            .partial(0)
            .equals(&ScalarField::expr(expected_v.differentiate(0), 1), &one_var)
            .unwrap());
        let closed = pot.u_closed_form.expect("mp carries a closed-form u");
        let back = ScalarField::expr(closed.differentiate(0), 1);
        assert!(back.equals(&lhs, &one_var).unwrap());
    }

    #[test]
    fn potential_is_diagonal_member_of_g1() {
        let pot = build_potential(&mp());
        let t = pot.a.tensor();
        assert!(matches!(
            t.get(&[0, 0]).to_expr(),
            Expr::FormalPrimitive { .. }
        ));
        assert!(t.get(&[0, 1]).is_structurally_zero());
        assert!(is_member(t, Space::G(1), &policy(4)).unwrap().is_member());
    }

    #[test]
    fn potential_verifies_for_builtin_metrics() {
        for kind in [
            MetricKind::Mp { h: None },
            MetricKind::ExtremeRn {
                mass: rational(3, 2),
            },
            MetricKind::Schwarzschild { omega: integer(4) },
        ] {
            let m = builtin_metric(kind).unwrap();
            let r = verify_potential(&m, &policy(12)).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(r.check("F = d_G A").unwrap().worst_residual, 0.0);
        }
    }

    #[test]
    fn non_harmonic_h_still_verifies() {
        let h = Expr::sum(vec![
            Expr::int(3),
            Expr::pow(Expr::coord(1), 2),
            Expr::product(vec![Expr::coord(2), Expr::coord(3)]),
        ]);
        let m = builtin_metric(MetricKind::Mp { h: Some(h.clone()) }).unwrap();
        let box_policy = EqualityPolicy::default();
        assert!(verify_potential(&m, &box_policy).unwrap().passed());
        assert!(!check_harmonic(&field(h), &box_policy).unwrap().passed());
    }

    #[test]
    fn generic_profiles_verify() {
        let h = Expr::coord(0);
        let f = Expr::sum(vec![Expr::int(2), Expr::pow(h.clone(), 2)]);
        let g = Expr::sum(vec![Expr::int(5), Expr::pow(h.clone(), 3)]);
        let hx = Expr::sum(vec![
            Expr::int(1),
            Expr::coord(1),
            Expr::scale(integer(2), Expr::coord(3)),
        ]);
        let m = builtin_metric(MetricKind::Custom { f, g, h: hx }).unwrap();
        let p = EqualityPolicy::default();
        assert!(verify_potential(&m, &p).unwrap().passed());
        assert!(table_report(&m, &p).unwrap().passed());
    }

    #[test]
    fn harmonic_checks() {
        let p = policy(10);
        let inv_r = Expr::sum(vec![Expr::one(), Expr::pow(Expr::radius(&[1, 2, 3]), -1)]);
        assert!(check_harmonic(&field(inv_r), &p).unwrap().passed());
        assert!(check_harmonic(&ScalarField::coordinate(4, 1), &p)
            .unwrap()
            .passed());
        let sq = ScalarField::coordinate(4, 1).times(&ScalarField::coordinate(4, 1));
        let r = check_harmonic(&sq, &p).unwrap();
        assert!(!r.passed());
        assert_eq!(r.checks[0].worst_residual, 2.0);
        assert!(check_harmonic(&ScalarField::coordinate(4, 0), &p).is_err());
    }

    #[test]
    fn schwarzschild_samples_avoid_the_throat() {
        let m = builtin_metric(MetricKind::Schwarzschild { omega: integer(4) }).unwrap();
        let h = m.h_field();
        for p in m.sample_points(&policy(50)).unwrap() {
            assert_ne!(h.evaluate(&p).unwrap().to_f64(), 0.0);
        }
    }

    #[test]
    fn family_classification() {
        assert_eq!(Family::of(&[0, 2, 0], true), Family::TimeTimeSpace);
        assert_eq!(Family::of(&[3, 0, 0], true), Family::SpaceTimeTime);
        assert_eq!(Family::of(&[2, 1, 2], true), Family::RepeatedOuter);
        assert_eq!(Family::of(&[2, 2, 1], true), Family::RepeatedOuter);
        assert_eq!(Family::of(&[1, 2, 2], true), Family::RepeatedInner);
        assert_eq!(Family::of(&[1, 1, 1], true), Family::RepeatedOuter);
        assert_eq!(Family::of(&[1, 1, 1], false), Family::Vanishing);
        assert_eq!(Family::of(&[1, 2, 3], true), Family::Vanishing);
        assert_eq!(Family::of(&[0, 1, 2], true), Family::Vanishing);
        assert_eq!(Family::of(&[0, 0, 0], true), Family::Vanishing);
    }
}
