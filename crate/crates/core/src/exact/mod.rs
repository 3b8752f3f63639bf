//! Exact integer and rational arithmetic, plus the special sequences the
//! verifiers consume: binomials, harmonic numbers, Bernoulli and Euler
//! numbers and polynomials, Legendre symbols, Fermat quotients and p-adic
//! valuations.
//!
//! Conventions: `B_1 = -1/2`; Euler numbers follow the secant expansion
//! (`E_0 = 1, E_2 = -1, E_4 = 5`, odd indices vanish).

mod arith;
mod special;

pub use arith::{
    fermat_quotient, is_prime, legendre_symbol, padic_valuation, primes_in, valuation_int,
    Valuation,
};
pub use special::{
    bernoulli_number, bernoulli_poly, binomial, binomial_signed, euler_number, euler_poly,
    harmonic, harmonic_gap, harmonic_range,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Harmonic number `H^(order)_{slope*k + offset}` as a function of the summation index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub order: u32,
    pub slope: u32,
    pub offset: i64,
}

impl HarmonicSpec {
    pub fn arg(&self, k: i64) -> i64 {
        self.slope as i64 * k + self.offset
    }

    /// Exact value at index `k`; the argument must be nonnegative.
    pub fn eval(&self, k: i64) -> Rational {
        let n = self.arg(k);
        assert!(n >= 0, "harmonic argument {n} is negative");
        harmonic(n as u64, self.order)
    }

    /// Holds when `slope*k + offset >= 0` for every `k >= start`.
    pub fn valid_from(&self, start: i64) -> bool {
        self.order >= 1 && self.arg(start) >= 0
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"a"`, `"-a/b"` or a plain decimal integer into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Syntax { line: 1, column: 1, message: format!("bad rational `{s}`") };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| err())?)),
    }
}

/// Canonical `num/den` (or `num` when integral) rendering.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat_pow(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

pub fn rat_abs(q: &Rational) -> Rational {
    q.abs()
}

pub mod serde_rational {
    //! Serializes a rational as the decimal string `"num/den"`.
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
