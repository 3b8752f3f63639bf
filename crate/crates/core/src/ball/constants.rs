use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::Ball;
use crate::error::{Error, Result};
use crate::exact::{bernoulli_number, int, rat, rat_pow, Rational};

const GUARD: u32 = 24;

static CACHE: LazyLock<RwLock<HashMap<(String, u32), Ball>>> = LazyLock::new(|| RwLock::new(HashMap::new()));

fn cached(key: String, prec: u32, f: impl FnOnce() -> Result<Ball>) -> Result<Ball> {
    if let Some(b) = CACHE.read().unwrap().get(&(key.clone(), prec)) {
        return Ok(b.clone());
    }
    let b = f()?;
    CACHE.write().unwrap().entry((key, prec)).or_insert(b.clone());
    Ok(b)
}

/// `sum (+/-)^j x^(2j+1)/(2j+1)` in fixed point at `w` bits for `|x| <= 1/2`;
/// returns the value and an error bound in ulps.
fn odd_series(x: &Rational, w: u32, alternating: bool) -> (BigInt, u64) {
    let neg = x.is_negative();
    let (a, b) = (x.numer().abs(), x.denom().clone());
    let (a2, b2) = (&a * &a, &b * &b);
    let mut pow = (&a << (w as usize)) / &b;
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !pow.is_zero() {
        let term = &pow / BigInt::from(2 * j + 1);
        if alternating && j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        pow = pow * &a2 / &b2;
        j += 1;
    }
    (if neg { -sum } else { sum }, 3 * j + 3)
}

fn series_ball(x: &Rational, prec: u32, alternating: bool) -> Ball {
    let w = prec + GUARD;
    let (v, e) = odd_series(x, w, alternating);
    Ball::from_raw(v, BigUint::from(e), w).with_prec(prec)
}

/// A ball containing pi, radius at most `2^(4 - prec)`.
pub fn const_pi(prec: u32) -> Ball {
    cached("pi".into(), prec, || {
        let w = prec + GUARD;
        let (a, ea) = odd_series(&rat(1, 5), w, true);
        let (b, eb) = odd_series(&rat(1, 239), w, true);
        Ok(Ball::from_raw(a * 16 - b * 4, BigUint::from(16 * ea + 4 * eb), w).with_prec(prec))
    })
    .expect("pi")
}

/// `sqrt(q)` for a nonnegative rational.
pub fn const_sqrt(q: &Rational, prec: u32) -> Result<Ball> {
    if q.is_negative() {
        return Err(Error::NegativeSqrt);
    }
    let w = prec as usize;
    // floor(sqrt(n * 2^(2w) / d)) = floor(sqrt(n * d * 2^(2w)) / d)
    let nd = (q.numer() * q.denom()).magnitude() << (2 * w);
    let s = BigInt::from(nd.sqrt());
    let lo = Rational::new(s.clone(), q.denom().clone());
    let hi = Rational::new(s + 1, q.denom().clone());
    let scale = Rational::from_integer(BigInt::one() << w);
    let mid = (&lo + &hi) / int(2) / &scale;
    Ok(Ball::from_rational(&mid, prec).add_error(&((&hi - &lo) / int(2) / scale)))
}

fn log2_ball(prec: u32) -> Ball {
    cached("log2".into(), prec, || Ok(series_ball(&rat(1, 3), prec, false).mul_int(&BigInt::from(2)))).expect("log 2")
}

/// `log q` for a positive rational `q`.
pub fn const_log(q: &Rational, prec: u32) -> Result<Ball> {
    if !q.is_positive() {
        return Err(Error::NonPositiveLog(q.to_string()));
    }
    if q.is_one() {
        return Ok(Ball::zero(prec));
    }
    cached(format!("log:{q}"), prec, || {
        let mut e = q.numer().bits() as i64 - q.denom().bits() as i64;
        let mut r = q / rat_pow(&int(2), e);
        while r > rat(4, 3) {
            r /= int(2);
            e += 1;
        }
        while r < rat(2, 3) {
            r *= int(2);
            e -= 1;
        }
        let t = (&r - int(1)) / (&r + int(1));
        let w = prec + 8;
        let body = series_ball(&t, w, false).mul_int(&BigInt::from(2));
        Ok(log2_ball(w).mul_int(&BigInt::from(e)).add(&body).with_prec(prec))
    })
}

/// `atan x` for a rational `x`.
pub fn atan_rational(x: &Rational, prec: u32) -> Ball {
    let half = rat(1, 2);
    if x.is_zero() {
        Ball::zero(prec)
    } else if x.is_negative() {
        atan_rational(&-x, prec).neg()
    } else if *x > int(1) {
        let w = prec + 4;
        const_pi(w).mul_rat(&half).sub(&atan_rational(&x.recip(), w)).with_prec(prec)
    } else if *x > half {
        let w = prec + 4;
        let y = (x * int(2) - int(1)) / (x + int(2));
        series_ball(&half, w, true).add(&series_ball(&y, w, true)).with_prec(prec)
    } else {
        series_ball(x, prec, true)
    }
}

impl Ball {
    /// `atan` of a ball: the midpoint value widened by the radius (atan is 1-Lipschitz).
    pub fn atan(&self) -> Ball {
        let base = atan_rational(&self.mid(), self.prec() + 4).with_prec(self.prec());
        base.add_error(&self.rad())
    }

    /// `log` of a positive ball.
    pub fn log(&self) -> Result<Ball> {
        if !self.is_positive() {
            return Err(Error::NonPositiveLog(self.mid().to_string()));
        }
        // |log x - log m| <= rad / (m - rad)
        let base = const_log(&self.mid(), self.prec() + 4)?.with_prec(self.prec());
        Ok(base.add_error(&(self.rad() / self.abs_lower())))
    }
}

fn pochhammer(s: u32, n: u32) -> BigInt {
    (0..n).fold(BigInt::one(), |acc, i| acc * BigInt::from(s + i))
}

fn em_remainder(s: u32, na: &Rational, m: u32) -> Rational {
    // |R_M| <= 4 (s)_{2M} / (2 pi)^{2M} * (N + a)^{-s-2M+1} / (s + 2M - 1), and 2 pi > 6
    let num = Rational::from_integer(pochhammer(s, 2 * m) * 4);
    let den = rat_pow(&int(6), 2 * m as i64) * rat_pow(na, (s + 2 * m - 1) as i64) * int((s + 2 * m - 1) as i64);
    num / den
}

/// Hurwitz zeta `sum_{n>=0} (n + a)^(-s)` for integer `s >= 2` and rational
/// `a` in `(0, 1]`, by Euler-Maclaurin with the remainder folded into the radius.
pub fn hurwitz_zeta(s: i64, a: &Rational, prec: u32) -> Result<Ball> {
    if s < 2 || !a.is_positive() || *a > int(1) {
        return Err(Error::HurwitzDomain { s, a: a.to_string() });
    }
    let s = s as u32;
    cached(format!("hurwitz:{s}:{a}"), prec, || {
        let w = prec + GUARD;
        // the remainder bound bottoms out near e^(-6N), so N grows with w
        let n = 16 + w / 6;
        let na = a + int(n as i64);
        let tol = Rational::new(BigInt::one(), BigInt::one() << (w as usize));
        let mut m = 1u32;
        while em_remainder(s, &na, m) > tol {
            m += 1;
            if 2 * m > 6 * n {
                return Err(Error::InsufficientPrecision(format!("Euler-Maclaurin stalled for zeta({s}, {a})")));
            }
        }
        let (an, ad) = (a.numer().clone(), a.denom().clone());
        let ad_s = num_traits::pow(ad.clone(), s as usize) << (w as usize);
        let mut sum = BigInt::zero();
        for k in 0..n {
            let base = &an + &ad * BigInt::from(k);
            sum += &ad_s / num_traits::pow(base, s as usize);
        }
        let mut errs = n as u64;
        let mut tail = rat_pow(&na, 1 - s as i64) / int(s as i64 - 1) + rat_pow(&na, -(s as i64)) / int(2);
        for j in 1..=m {
            let b = bernoulli_number(2 * j as u64);
            let fact: BigInt = (1..=2 * j as u64).map(BigInt::from).product();
            tail += b / Rational::from_integer(fact) * Rational::from_integer(pochhammer(s, 2 * j - 1))
                * rat_pow(&na, -((s + 2 * j - 1) as i64));
        }
        let tb = Ball::from_rational(&tail, w);
        errs += 1;
        let body = Ball::from_raw(sum, BigUint::from(errs), w).add(&tb);
        Ok(body.add_error(&em_remainder(s, &na, m)).with_prec(prec))
    })
}

/// `zeta(n)` for `n >= 2`.
pub fn const_zeta(n: i64, prec: u32) -> Result<Ball> {
    hurwitz_zeta(n, &int(1), prec)
}

fn l_value(s: i64, q: i64, prec: u32) -> Result<Ball> {
    let w = prec + 8;
    let d = hurwitz_zeta(s, &rat(1, q), w)?.sub(&hurwitz_zeta(s, &rat(q - 1, q), w)?);
    Ok(d.mul_rat(&rat_pow(&rat(1, q), s)).with_prec(prec))
}

/// `K = L(2, (./3)) = (zeta(2,1/3) - zeta(2,2/3)) / 9`.
pub fn const_k(prec: u32) -> Ball {
    l_value(2, 3, prec).expect("K")
}

/// Catalan's constant `G = (zeta(2,1/4) - zeta(2,3/4)) / 16`.
pub fn const_catalan(prec: u32) -> Ball {
    l_value(2, 4, prec).expect("G")
}

/// Dirichlet beta at 4, `(zeta(4,1/4) - zeta(4,3/4)) / 256`.
pub fn const_beta4(prec: u32) -> Ball {
    l_value(4, 4, prec).expect("beta(4)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let p = const_pi(128);
        let lo = Rational::new(BigInt::from(3141592653589793238u64), BigInt::from(10u64).pow(18));
        assert!((p.mid() - lo).abs() < rat(1, 1_000_000_000_000_000_000));
        assert!(p.rad() <= rat_pow(&int(2), 4 - 128));
    }

    #[test]
    fn logs_are_additive() {
        let p = 200;
        let l = const_log(&rat(2, 3), p).unwrap();
        let d = const_log(&int(2), p).unwrap().sub(&const_log(&int(3), p).unwrap());
        assert!(l.overlaps(&d));
        let four = const_log(&int(4), p).unwrap();
        assert!(four.overlaps(&const_log(&int(2), p).unwrap().mul_int(&BigInt::from(2))));
        assert!(const_log(&int(1), p).unwrap().is_exact());
        assert!(const_log(&int(0), p).is_err());
    }

    #[test]
    fn arctangent_reductions() {
        let p = 160;
        let pi = const_pi(p);
        assert!(atan_rational(&int(1), p).overlaps(&pi.mul_rat(&rat(1, 4))));
        let s3 = const_sqrt(&int(3), p).unwrap();
        assert!(s3.atan().overlaps(&pi.mul_rat(&rat(1, 3))));
        assert!(atan_rational(&int(-7), p).overlaps(&atan_rational(&int(7), p).neg()));
    }

    #[test]
    fn hurwitz_basics() {
        let p = 200;
        let pi2 = const_pi(p).pow(2).unwrap();
        assert!(const_zeta(2, p).unwrap().overlaps(&pi2.mul_rat(&rat(1, 6))));
        assert!(hurwitz_zeta(2, &rat(1, 2), p).unwrap().overlaps(&pi2.mul_rat(&rat(1, 2))));
        assert!(hurwitz_zeta(1, &int(1), p).is_err());
        assert!(hurwitz_zeta(2, &int(0), p).is_err());
    }
}
