//! Midpoint-radius real arithmetic on binary fixed-point numbers.
//!
//! A [`Ball`] at precision `P` stores integers `mid` and `rad`; it stands for
//! every real in `[(mid - rad) / 2^P, (mid + rad) / 2^P]`. Each operation
//! rounds the midpoint and widens the radius outward so the exact image of
//! the inputs stays inside the output.

mod constants;

pub use constants::{
    atan_rational, const_beta4, const_catalan, const_k, const_log, const_pi, const_sqrt, const_zeta, hurwitz_zeta,
};

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Binary precision giving `digits` decimal digits plus 32 guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigUint,
    prec: u32,
}

fn shl(x: &BigInt, s: u32) -> BigInt {
    x << (s as usize)
}

/// Nearest integer to `n / d` for `d > 0`, ties upward.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    Integer::div_floor(&(n * 2 + d), &(d * 2))
}

fn div_ceil_u(n: &BigUint, d: &BigUint) -> BigUint {
    Integer::div_ceil(n, d)
}

impl Ball {
    pub fn zero(prec: u32) -> Self {
        Ball { mid: BigInt::zero(), rad: BigUint::zero(), prec }
    }

    pub fn from_raw(mid: BigInt, rad: BigUint, prec: u32) -> Self {
        Ball { mid, rad, prec }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Self {
        Ball { mid: shl(&n.into(), prec), rad: BigUint::zero(), prec }
    }

    /// Nearest fixed-point value; the radius is one ulp unless exact.
    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let n = shl(q.numer(), prec);
        let d = q.denom();
        let (quo, rem) = n.div_rem(d);
        if rem.is_zero() {
            return Ball { mid: quo, rad: BigUint::zero(), prec };
        }
        Ball { mid: div_round(&n, d), rad: BigUint::one(), prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigUint {
        &self.rad
    }

    fn scale(&self) -> BigInt {
        BigInt::one() << (self.prec as usize)
    }

    pub fn mid(&self) -> Rational {
        Rational::new(self.mid.clone(), self.scale())
    }

    pub fn rad(&self) -> Rational {
        Rational::new(BigInt::from(self.rad.clone()), self.scale())
    }

    pub fn lower(&self) -> Rational {
        self.mid() - self.rad()
    }

    pub fn upper(&self) -> Rational {
        self.mid() + self.rad()
    }

    /// An upper bound on `|x|` over the ball.
    pub fn abs_upper(&self) -> Rational {
        self.mid().abs() + self.rad()
    }

    /// A lower bound on `|x|` over the ball; zero when the ball straddles zero.
    pub fn abs_lower(&self) -> Rational {
        let d = self.mid().abs() - self.rad();
        if d.is_negative() {
            Rational::zero()
        } else {
            d
        }
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        (q - self.mid()).abs() <= self.rad()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.magnitude() <= &self.rad
    }

    pub fn overlaps(&self, o: &Ball) -> bool {
        (self.mid() - o.mid()).abs() <= self.rad() + o.rad()
    }

    pub fn is_positive(&self) -> bool {
        self.mid.is_positive() && self.mid.magnitude() > &self.rad
    }

    pub fn is_negative(&self) -> bool {
        self.mid.is_negative() && self.mid.magnitude() > &self.rad
    }

    /// Re-expresses the ball at another precision, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Ball {
        if prec >= self.prec {
            let s = (prec - self.prec) as usize;
            return Ball { mid: &self.mid << s, rad: &self.rad << s, prec };
        }
        let s = self.prec - prec;
        let d = BigInt::one() << (s as usize);
        let (q, r) = self.mid.div_rem(&d);
        let (mid, extra) = if r.is_zero() { (q, 0u32) } else { (div_round(&self.mid, &d), 1) };
        let rad = div_ceil_u(&self.rad, d.magnitude()) + BigUint::from(extra);
        Ball { mid, rad, prec }
    }

    fn align(&self, o: &Ball) -> (Ball, Ball) {
        let p = self.prec.max(o.prec);
        (self.with_prec(p), o.with_prec(p))
    }

    pub fn add(&self, o: &Ball) -> Ball {
        if self.prec != o.prec {
            let (a, b) = self.align(o);
            return a.add(&b);
        }
        Ball { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        if self.prec != o.prec {
            let (a, b) = self.align(o);
            return a.mul(&b);
        }
        let p = self.prec as usize;
        let prod = &self.mid * &o.mid;
        let (m1, m2) = (self.mid.magnitude(), o.mid.magnitude());
        let err = m1 * &o.rad + m2 * &self.rad + &self.rad * &o.rad;
        let d = BigUint::one() << p;
        let (q, r) = prod.div_rem(&BigInt::from(d.clone()));
        let (mid, extra) = if r.is_zero() { (q, 0u32) } else { (div_round(&prod, &BigInt::from(d.clone())), 1) };
        let rad = div_ceil_u(&err, &d) + BigUint::from(extra);
        Ball { mid, rad, prec: self.prec }
    }

    /// Exact multiplication by a rational, with a single rounding.
    pub fn mul_rat(&self, q: &Rational) -> Ball {
        let n = &self.mid * q.numer();
        let d = q.denom();
        let (quo, r) = n.div_rem(d);
        let (mid, extra) = if r.is_zero() { (quo, 0u32) } else { (div_round(&n, d), 1) };
        let rad = div_ceil_u(&(&self.rad * q.numer().magnitude()), d.magnitude()) + BigUint::from(extra);
        Ball { mid, rad, prec: self.prec }
    }

    pub fn mul_int(&self, n: &BigInt) -> Ball {
        Ball { mid: &self.mid * n, rad: &self.rad * n.magnitude(), prec: self.prec }
    }

    pub fn div(&self, o: &Ball) -> Result<Ball> {
        if self.prec != o.prec {
            let (a, b) = self.align(o);
            return a.div(&b);
        }
        if o.contains_zero() {
            return Err(Error::DivisionByZeroBall);
        }
        let p = self.prec as usize;
        let num = &self.mid << p;
        let mid = div_round(&num, &o.mid.abs()) * o.mid.signum();
        let (m1, m2) = (self.mid.magnitude(), o.mid.magnitude());
        let err_num = (&self.rad * m2 + m1 * &o.rad) << p;
        let err_den = m2 * (m2 - &o.rad);
        let rad = div_ceil_u(&err_num, &err_den) + BigUint::one();
        Ok(Ball { mid, rad, prec: self.prec })
    }

    pub fn recip(&self) -> Result<Ball> {
        Ball::from_int(1, self.prec).div(self)
    }

    pub fn sqrt(&self) -> Result<Ball> {
        let p = self.prec as usize;
        let r = BigInt::from(self.rad.clone());
        if (&self.mid + &r).is_negative() {
            return Err(Error::NegativeSqrt);
        }
        if self.mid <= r {
            // straddles zero: enclose [0, sqrt(mid + rad)]
            let hi = ((&self.mid + &r).magnitude() << p).sqrt() + BigUint::one();
            let mid = &hi / 2u32;
            let rad = &hi - &mid;
            return Ok(Ball { mid: BigInt::from(mid), rad, prec: self.prec });
        }
        let m = self.mid.magnitude();
        let mid = BigInt::from((m << p).sqrt());
        let rad = if self.rad.is_zero() {
            BigUint::one()
        } else {
            let low = ((m - &self.rad) << p).sqrt();
            div_ceil_u(&(&self.rad << p), &low.max(BigUint::one())) + BigUint::one()
        };
        Ok(Ball { mid, rad, prec: self.prec })
    }

    pub fn pow(&self, e: i64) -> Result<Ball> {
        if e < 0 {
            return self.pow(-e)?.recip();
        }
        let mut acc = Ball::from_int(1, self.prec);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Widens the radius by a nonnegative rational error bound.
    pub fn add_error(&self, e: &Rational) -> Ball {
        let e = e.abs() * Rational::from_integer(self.scale());
        let extra = e.ceil().to_integer();
        Ball { mid: self.mid.clone(), rad: &self.rad + extra.magnitude(), prec: self.prec }
    }

    /// Joins a ball with the bounds on both sides, used when the value is
    /// known only up to the hull of two enclosures.
    pub fn union(&self, o: &Ball) -> Ball {
        let (a, b) = self.align(o);
        let lo = a.lower().min(b.lower());
        let hi = a.upper().max(b.upper());
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        let r = (&hi - &lo) / Rational::from_integer(2.into());
        Ball::from_rational(&mid, a.prec).add_error(&r)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.mid())
    }

    /// Midpoint in fixed notation with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        decimal(&self.mid(), digits)
    }
}

/// `q` rounded to `digits` fractional decimal digits.
pub fn decimal(q: &Rational, digits: usize) -> String {
    let ten = num_traits::pow(BigInt::from(10), digits);
    let scaled = div_round(&(q.numer() * &ten).abs(), q.denom());
    let s = scaled.to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if q.is_negative() && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn big_log2(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 60 {
        return n.abs().to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 60;
    let top = (n.abs() >> (shift as usize)).to_f64().unwrap_or(1.0);
    top.log2() + shift as f64
}

/// `log10 |q|` in double precision; `-inf` for zero.
pub fn log10_abs(q: &Rational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    (big_log2(q.numer()) - big_log2(q.denom())) / std::f64::consts::LOG2_10
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let s = if q.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    s * (log10_abs(q) * std::f64::consts::LN_10).exp()
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) / std::f64::consts::LOG2_10).floor().max(1.0) as usize;
        let r = self.rad();
        if r.is_zero() {
            write!(f, "[{} +/- 0]", self.to_decimal(digits.min(40)))
        } else {
            write!(f, "[{} +/- 1e{:.0}]", self.to_decimal(digits.min(40)), log10_abs(&r).ceil())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn rounding_encloses_rationals() {
        for (n, d) in [(1, 3), (-22, 7), (355, 113), (0, 1), (7, 8)] {
            let q = rat(n, d);
            let b = Ball::from_rational(&q, 64);
            assert!(b.contains(&q));
        }
        assert!(Ball::from_rational(&rat(7, 8), 64).is_exact());
    }

    #[test]
    fn arithmetic_contains_exact_results() {
        let (x, y) = (rat(-17, 11), rat(5, 13));
        let (bx, by) = (Ball::from_rational(&x, 80), Ball::from_rational(&y, 80));
        assert!(bx.add(&by).contains(&(&x + &y)));
        assert!(bx.sub(&by).contains(&(&x - &y)));
        assert!(bx.mul(&by).contains(&(&x * &y)));
        assert!(bx.div(&by).unwrap().contains(&(&x / &y)));
        assert!(bx.mul_rat(&y).contains(&(&x * &y)));
        assert!(by.pow(-3).unwrap().contains(&crate::exact::rat_pow(&y, -3)));
        let two = Ball::from_int(2, 80).sqrt().unwrap();
        assert!(two.mul(&two).contains(&int(2)));
        assert!(Ball::zero(64).recip().is_err());
    }

    #[test]
    fn precision_changes_round_outward() {
        let b = Ball::from_rational(&rat(1, 3), 200);
        let c = b.with_prec(70);
        assert!(c.contains(&rat(1, 3)));
        assert_eq!(c.with_prec(200).with_prec(70), c);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&rat(-1, 8), 3), "-0.125");
        assert_eq!(decimal(&rat(22, 7), 4), "3.1429");
        assert_eq!(decimal(&int(5), 0), "5");
        assert!((log10_abs(&rat(1, 1000)) + 3.0).abs() < 1e-12);
    }
}
