//! Property checks that use no published values: every oracle here is an
//! identity the quantity must satisfy.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use serieslab_core::ball::{const_log, const_zeta, hurwitz_zeta, Ball};
use serieslab_core::exact::{
    bernoulli_number, bernoulli_poly, binomial, euler_number, euler_poly, harmonic, harmonic_range, rat_pow, Rational,
};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-1_000_000i64..1_000_000, 1i64..1_000_000).prop_map(|(n, d)| q(n, d))
}

fn positive() -> impl Strategy<Value = Rational> {
    (1i64..1_000_000, 1i64..1_000_000).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arithmetic_encloses_exact_results(a in rational(), b in rational(), c in rational(), prec in 24u32..240) {
        let (x, y, z) = (Ball::from_rational(&a, prec), Ball::from_rational(&b, prec), Ball::from_rational(&c, prec));
        prop_assert!(x.add(&y).contains(&(&a + &b)));
        prop_assert!(x.sub(&y).contains(&(&a - &b)));
        prop_assert!(x.mul(&y).contains(&(&a * &b)));
        prop_assert!(x.mul_rat(&c).contains(&(&a * &c)));
        prop_assert!(x.add(&y).mul(&z).sub(&x.mul(&z)).contains(&(&b * &c)));
        if !b.is_zero() {
            prop_assert!(x.div(&y).unwrap().contains(&(&a / &b)));
        }
    }

    #[test]
    fn powers_enclose_exact_results(a in rational(), e in -3i64..6, prec in 24u32..200) {
        prop_assume!(!a.is_zero());
        prop_assert!(Ball::from_rational(&a, prec).pow(e).unwrap().contains(&rat_pow(&a, e)));
    }

    #[test]
    fn square_roots_bracket(a in positive(), prec in 24u32..200) {
        let r = Ball::from_rational(&a, prec).sqrt().unwrap();
        let (lo, hi) = (r.lower().max(Rational::zero()), r.upper());
        prop_assert!(&lo * &lo <= a && a <= &hi * &hi);
    }

    #[test]
    fn logarithms_add(a in positive(), b in positive()) {
        let prec = 160;
        let sum = const_log(&a, prec).unwrap().add(&const_log(&b, prec).unwrap());
        prop_assert!(sum.overlaps(&const_log(&(&a * &b), prec).unwrap()));
    }

    #[test]
    fn harmonic_recurrence(n in 1u64..400, m in 1u32..5) {
        prop_assert_eq!(harmonic(n, m) - harmonic(n - 1, m), rat_pow(&q(n as i64, 1), -(m as i64)));
        prop_assert_eq!(harmonic_range(0, n, m), harmonic(n, m));
    }

    #[test]
    fn bernoulli_recurrence(n in 1u64..60) {
        // sum_{k<=n} C(n+1,k) B_k = 0
        let s: Rational = (0..=n).map(|k| Rational::from_integer(binomial(n + 1, k)) * bernoulli_number(k)).sum();
        prop_assert!(s.is_zero());
    }

    #[test]
    fn bernoulli_polynomial_difference(n in 1u64..30, x in rational()) {
        // B_n(x+1) - B_n(x) = n x^(n-1)
        let d = bernoulli_poly(n, &(&x + Rational::one())) - bernoulli_poly(n, &x);
        prop_assert_eq!(d, q(n as i64, 1) * rat_pow(&x, n as i64 - 1));
    }

    #[test]
    fn euler_recurrence(m in 1u64..30) {
        // sum_k C(2m, 2k) E_2k = 0
        let s: BigInt = (0..=m).map(|k| binomial(2 * m, 2 * k) * euler_number(2 * k)).sum();
        prop_assert!(s.is_zero());
    }

    #[test]
    fn euler_polynomial_sum(n in 1u64..30, x in rational()) {
        // E_n(x+1) + E_n(x) = 2 x^n
        let s = euler_poly(n, &(&x + Rational::one())) + euler_poly(n, &x);
        prop_assert_eq!(s, q(2, 1) * rat_pow(&x, n as i64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // sum_{j<m} zeta(s, (a+j)/m) = m^s zeta(s, a)
    #[test]
    fn hurwitz_multiplication(s in 2i64..6, m in 2i64..6, an in 1i64..8, ad in 1i64..8) {
        prop_assume!(an <= ad);
        let a = q(an, ad);
        let prec = 140;
        let mut lhs = Ball::zero(prec);
        for j in 0..m {
            lhs = lhs.add(&hurwitz_zeta(s, &((&a + q(j, 1)) / q(m, 1)), prec).unwrap());
        }
        let rhs = hurwitz_zeta(s, &a, prec).unwrap().mul_rat(&rat_pow(&q(m, 1), s));
        prop_assert!(lhs.overlaps(&rhs));
        prop_assert!(lhs.rad() < q(1, 1) / Rational::from_integer(BigInt::from(10).pow(30)));
    }
}

#[test]
fn hurwitz_at_one_is_zeta() {
    for s in 2..8 {
        let a = hurwitz_zeta(s, &q(1, 1), 200).unwrap();
        assert!(a.overlaps(&const_zeta(s, 200).unwrap()));
    }
    // zeta(2, 1/2) = 3 zeta(2), the m = 2 case at a = 1
    let half = hurwitz_zeta(2, &q(1, 2), 200).unwrap();
    assert!(half.overlaps(&const_zeta(2, 200).unwrap().mul_int(&BigInt::from(3))));
    assert!(half.sub(&const_zeta(2, 200).unwrap().mul_int(&BigInt::from(3))).abs_upper().abs() < q(1, 1_000_000_000));
}
