use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::QPoly;
use crate::exact::{binomial, format_rational, Rational};

/// Polynomial in two variables `(m, n)`, keyed by exponent pairs.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly2::zero().with_term(0, 0, c)
    }

    pub fn m() -> Self {
        Poly2::zero().with_term(1, 0, Rational::one())
    }

    pub fn n() -> Self {
        Poly2::zero().with_term(0, 1, Rational::one())
    }

    /// Lifts a univariate polynomial in `n`.
    pub fn from_n(p: &QPoly) -> Self {
        let mut out = Poly2::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            out = out.with_term(0, i as u32, c.clone());
        }
        out
    }

    /// Lifts a univariate polynomial in `m`.
    pub fn from_m(p: &QPoly) -> Self {
        let mut out = Poly2::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            out = out.with_term(i as u32, 0, c.clone());
        }
        out
    }

    pub fn with_term(mut self, i: u32, j: u32, c: Rational) -> Self {
        let e = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out = out.with_term(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly2 { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Poly2::zero();
        }
        Poly2 { terms: self.terms.iter().map(|(k, a)| (*k, a * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Poly2::zero();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &o.terms {
                out = out.with_term(i1 + i2, j1 + j2, a * b);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Poly2::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    /// Substitutes `n -> n + s`.
    pub fn shift_n(&self, s: i64) -> Self {
        let mut out = Poly2::zero();
        let s = Rational::from_integer(s.into());
        for (&(i, j), c) in &self.terms {
            // (n + s)^j = sum_l C(j, l) n^l s^(j - l)
            for l in 0..=j {
                let coef = c * Rational::from_integer(binomial(j as u64, l as u64)) * num_traits::pow(s.clone(), (j - l) as usize);
                out = out.with_term(i, l, coef);
            }
        }
        out
    }

    /// Substitutes a value for `m`, keeping a polynomial in `n`.
    pub fn eval_m(&self, m: &Rational) -> Self {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            out = out.with_term(0, j, c * num_traits::pow(m.clone(), i as usize));
        }
        out
    }

    /// Substitutes a value for `n`, keeping a polynomial in `m`.
    pub fn eval_n(&self, n: &Rational) -> Self {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            out = out.with_term(i, 0, c * num_traits::pow(n.clone(), j as usize));
        }
        out
    }

    pub fn eval(&self, m: &Rational, n: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * num_traits::pow(m.clone(), i as usize) * num_traits::pow(n.clone(), j as usize))
            .sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(i, j), c)| {
                let mut s = format_rational(c);
                if i > 0 {
                    s.push_str(&format!("*m^{i}"));
                }
                if j > 0 {
                    s.push_str(&format!("*n^{j}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
