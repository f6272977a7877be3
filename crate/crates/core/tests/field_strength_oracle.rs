//! MP field strength against closed forms computed by hand in exact
//! rationals: with `H = 1 + 1/r`, `∂ⱼH = −xⱼ/r³`,
//! `F_{jtt} = (2/3)(H⁻⁵ + H⁻¹) ∂ⱼH` and `F_{jkk} = (4/3) ∂ⱼH / H`.

use cochain_core::field::{integer, rational, Value};
use cochain_core::spacetime::{
    builtin_metric, christoffel_lowered, symmetric_free_part, MetricKind,
};
use cochain_core::{EqualityPolicy, Point, Rational, ScalarFunction};
use num_traits::{One, Pow};

fn exact(v: Value) -> Rational {
    match v {
        Value::Exact(r) => r,
        Value::Approx(x) => panic!("inexact value {x}"),
    }
}

#[test]
fn mp_field_strength_matches_rational_oracle() {
    let policy = EqualityPolicy::spacetime(20, 17, 1e-12).unwrap();
    let m = builtin_metric(MetricKind::Mp { h: None }).unwrap();
    let f = symmetric_free_part(&christoffel_lowered(&m), &policy)
        .unwrap()
        .field_strength;
    let f = f.tensor();
    for p in policy.sample_points(4, |_| true).unwrap() {
        let x = p.coords();
        let r2: Rational = x[1..].iter().map(|c| c * c).sum();
        let r = Rational::from_integer(r2.to_integer().sqrt());
        assert_eq!(&r * &r, r2);
        let h = Rational::one() + r.recip();
        let r3: Rational = Pow::pow(&r, 3u32);
        for j in 1..4 {
            let dh = -x[j].clone() / &r3;
            let h5: Rational = Pow::pow(h.recip(), 5u32);
            let f_jtt = rational(2, 3) * (h5 + h.recip()) * &dh;
            assert_eq!(
                exact(f.get(&[j, 0, 0]).evaluate(&p).unwrap()),
                f_jtt,
                "F_j00 at {p}"
            );
            assert_eq!(
                exact(f.get(&[0, j, 0]).evaluate(&p).unwrap()),
                -f_jtt.clone() / integer(2),
                "F_0j0 at {p}"
            );
            for k in 1..4 {
                let value = exact(f.get(&[j, k, k]).evaluate(&p).unwrap());
                let expected = if j == k {
                    integer(0)
                } else {
                    rational(4, 3) * &dh / &h
                };
                assert_eq!(value, expected, "F_jkk at {p}");
            }
        }
    }
}

#[test]
fn spot_values_at_one_two_two() {
    let m = builtin_metric(MetricKind::Mp { h: None }).unwrap();
    let f = symmetric_free_part(&christoffel_lowered(&m), &EqualityPolicy::default())
        .unwrap()
        .field_strength;
    let p = Point::from_ints(&[0, 1, 2, 2]);
    let f_1tt = f.tensor().get(&[1, 0, 0]).evaluate(&p).unwrap();
    let f_122 = f.tensor().get(&[1, 2, 2]).evaluate(&p).unwrap();
    assert_eq!(exact(f_1tt.clone()), rational(-337, 13824));
    assert_eq!(exact(f_122), rational(-1, 27));
    assert!((f_1tt.to_f64() + 0.0243779).abs() < 1e-7);
    assert!(f.tensor().get(&[2, 2, 2]).evaluate(&p).unwrap().to_f64() == 0.0);
    assert!(!f.tensor().get(&[1, 0, 0]).is_structurally_zero());
}
