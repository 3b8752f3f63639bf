//! Closed forms: rational linear combinations of monomials in named constants.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ball::{const_beta4, const_catalan, const_k, const_log, const_pi, const_sqrt, const_zeta, Ball};
use crate::dsl::{self, Expr};
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, padic_valuation, parse_rational, primes_in, rat_pow, Rational, Valuation};

/// A named real constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Pi,
    /// `sqrt(d)` for square-free `d > 1`.
    Sqrt(u64),
    /// `log q` for positive rational `q != 1`.
    Log(Rational),
    /// `zeta(n)` for `n >= 2`.
    Zeta(u32),
    /// Catalan's constant `L(2, (-4/.))`.
    Catalan,
    /// `L(2, (./3))`.
    K3,
    /// Dirichlet beta at 4.
    Beta4,
}

impl Constant {
    pub fn eval(&self, prec: u32) -> Result<Ball> {
        Ok(match self {
            Constant::Pi => const_pi(prec),
            Constant::Sqrt(d) => const_sqrt(&int(*d as i64), prec)?,
            Constant::Log(q) => const_log(q, prec)?,
            Constant::Zeta(n) => const_zeta(*n as i64, prec)?,
            Constant::Catalan => const_catalan(prec),
            Constant::K3 => const_k(prec),
            Constant::Beta4 => const_beta4(prec),
        })
    }

    /// Reads an identifier or call such as `pi`, `sqrt(3)`, `log(2/3)`.
    pub fn from_call(name: &str, args: &[Rational]) -> Result<Constant> {
        let unsupported = || Error::UnsupportedConstant(format!("{name}({})", args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")));
        let one_int = || -> Result<i64> {
            match args {
                [a] if a.is_integer() => a.to_integer().to_i64().ok_or_else(unsupported),
                _ => Err(unsupported()),
            }
        };
        match (name, args.len()) {
            ("pi", 0) => Ok(Constant::Pi),
            ("G", 0) => Ok(Constant::Catalan),
            ("K", 0) => Ok(Constant::K3),
            ("beta4", 0) => Ok(Constant::Beta4),
            ("beta", 1) if one_int()? == 4 => Ok(Constant::Beta4),
            ("zeta", 1) => {
                let n = one_int()?;
                if n < 2 {
                    return Err(unsupported());
                }
                Ok(Constant::Zeta(n as u32))
            }
            ("log", 1) if args[0].is_positive() => Ok(Constant::Log(args[0].clone())),
            ("sqrt", 1) => {
                let d = one_int()?;
                if d <= 1 {
                    return Err(unsupported());
                }
                Ok(Constant::Sqrt(d as u64))
            }
            _ => Err(unsupported()),
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Pi => write!(f, "pi"),
            Constant::Sqrt(d) => write!(f, "sqrt({d})"),
            Constant::Log(q) => write!(f, "log({})", format_rational(q)),
            Constant::Zeta(n) => write!(f, "zeta({n})"),
            Constant::Catalan => write!(f, "G"),
            Constant::K3 => write!(f, "K"),
            Constant::Beta4 => write!(f, "beta(4)"),
        }
    }
}

/// `coefficient * prod constant^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantMonomial {
    pub coefficient: Rational,
    pub factors: Vec<(Constant, i32)>,
}

/// A finite sum of monomials with distinct factor lists.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClosedForm {
    terms: Vec<ConstantMonomial>,
}

/// Splits `d` into `s^2 * f` with `f` square-free.
fn square_part(d: u64) -> (u64, u64) {
    let (mut s, mut f) = (1u64, 1u64);
    let mut rest = d;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            f *= p;
        }
        p += 1;
    }
    (s, f * rest)
}

impl ClosedForm {
    pub fn zero() -> Self {
        ClosedForm::default()
    }

    pub fn rational(q: Rational) -> Self {
        ClosedForm::from_terms(vec![ConstantMonomial { coefficient: q, factors: vec![] }])
    }

    pub fn constant(c: Constant) -> Self {
        ClosedForm::from_terms(vec![ConstantMonomial { coefficient: Rational::one(), factors: vec![(c, 1)] }])
    }

    /// Canonicalizes: merges equal factors, folds `sqrt` powers and square
    /// factors into the coefficient, sorts and merges terms.
    pub fn from_terms(terms: Vec<ConstantMonomial>) -> Self {
        let mut merged: BTreeMap<Vec<(Constant, i32)>, Rational> = BTreeMap::new();
        for t in terms {
            let mut coef = t.coefficient;
            let mut fs: BTreeMap<Constant, i32> = BTreeMap::new();
            for (c, e) in t.factors {
                match c {
                    Constant::Sqrt(d) => {
                        let (s, f) = square_part(d);
                        coef *= rat_pow(&int(s as i64), e as i64);
                        if f > 1 {
                            *fs.entry(Constant::Sqrt(f)).or_insert(0) += e;
                        }
                    }
                    Constant::Log(ref q) if q.is_one() => coef = Rational::zero(),
                    c => *fs.entry(c).or_insert(0) += e,
                }
            }
            let mut factors = Vec::new();
            for (c, e) in fs {
                if let Constant::Sqrt(d) = c {
                    // sqrt(d)^e = d^floor(e/2) * sqrt(d)^(e mod 2)
                    let half = e.div_euclid(2);
                    coef *= rat_pow(&int(d as i64), half as i64);
                    if e.rem_euclid(2) == 1 {
                        factors.push((c, 1));
                    }
                } else if e != 0 {
                    factors.push((c, e));
                }
            }
            if coef.is_zero() {
                continue;
            }
            *merged.entry(factors).or_insert_with(Rational::zero) += coef;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coefficient)| ConstantMonomial { coefficient, factors })
            .collect();
        ClosedForm { terms }
    }

    pub fn terms(&self) -> &[ConstantMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value when no constant appears.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [t] if t.factors.is_empty() => Some(t.coefficient.clone()),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ClosedForm::from_terms(self.terms.iter().chain(&o.terms).cloned().collect())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        ClosedForm::from_terms(
            self.terms.iter().map(|t| ConstantMonomial { coefficient: &t.coefficient * q, factors: t.factors.clone() }).collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                out.push(ConstantMonomial {
                    coefficient: &a.coefficient * &b.coefficient,
                    factors: a.factors.iter().chain(&b.factors).cloned().collect(),
                });
            }
        }
        ClosedForm::from_terms(out)
    }

    /// Integer power; negative powers need a single monomial.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            return Ok((0..e).fold(ClosedForm::rational(Rational::one()), |acc, _| acc.mul(self)));
        }
        match self.terms.as_slice() {
            [t] => {
                let inv = ConstantMonomial {
                    coefficient: t.coefficient.recip(),
                    factors: t.factors.iter().map(|(c, x)| (c.clone(), -x)).collect(),
                };
                ClosedForm::from_terms(vec![inv]).pow(-e)
            }
            _ => Err(Error::UnsupportedConstant(format!("negative power of the sum `{self}`"))),
        }
    }

    /// Constants appearing anywhere in the form.
    pub fn constants(&self) -> Vec<Constant> {
        let mut v: Vec<Constant> = self.terms.iter().flat_map(|t| t.factors.iter().map(|(c, _)| c.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Rewrites each `log q` over prime logarithms, so equal values compare equal.
    pub fn expand_logs(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            let logs: Vec<&(Constant, i32)> = t.factors.iter().filter(|(c, _)| matches!(c, Constant::Log(_))).collect();
            match logs.as_slice() {
                [(Constant::Log(q), 1)] => {
                    let rest: Vec<(Constant, i32)> =
                        t.factors.iter().filter(|(c, _)| !matches!(c, Constant::Log(_))).cloned().collect();
                    for (p, e) in prime_exponents(q) {
                        let mut f = rest.clone();
                        f.push((Constant::Log(int(p as i64)), 1));
                        out.push(ConstantMonomial { coefficient: &t.coefficient * int(e), factors: f });
                    }
                }
                _ => out.push(t.clone()),
            }
        }
        ClosedForm::from_terms(out)
    }

    /// A ball containing the value at `prec` bits.
    pub fn eval(&self, prec: u32) -> Result<Ball> {
        let w = prec + 16;
        let mut acc = Ball::zero(w);
        for t in &self.terms {
            let mut m = Ball::from_int(1, w);
            for (c, e) in &t.factors {
                m = m.mul(&c.eval(w)?.pow(*e as i64)?);
            }
            acc = acc.add(&m.mul_rat(&t.coefficient));
        }
        Ok(acc.with_prec(prec))
    }

    /// Interprets a DSL expression over the constant alphabet.
    pub fn from_expr(e: &Expr) -> Result<Self> {
        Ok(match e {
            Expr::Num(n) => ClosedForm::rational(Rational::from_integer(n.clone())),
            Expr::Var(v) => ClosedForm::constant(Constant::from_call(v, &[])?),
            Expr::Call(name, args) => {
                let vals = args
                    .iter()
                    .map(|a| ClosedForm::from_expr(a)?.as_rational().ok_or_else(|| Error::UnsupportedConstant(format!("{a}"))))
                    .collect::<Result<Vec<_>>>()?;
                ClosedForm::constant(Constant::from_call(name, &vals)?)
            }
            Expr::Add(a, b) => ClosedForm::from_expr(a)?.add(&ClosedForm::from_expr(b)?),
            Expr::Sub(a, b) => ClosedForm::from_expr(a)?.sub(&ClosedForm::from_expr(b)?),
            Expr::Mul(a, b) => ClosedForm::from_expr(a)?.mul(&ClosedForm::from_expr(b)?),
            Expr::Div(a, b) => {
                let d = ClosedForm::from_expr(b)?;
                if d.is_zero() {
                    return Err(Error::UnsupportedConstant("division by zero".into()));
                }
                ClosedForm::from_expr(a)?.mul(&d.pow(-1)?)
            }
            Expr::Neg(a) => ClosedForm::from_expr(a)?.neg(),
            Expr::Pow(a, k) => ClosedForm::from_expr(a)?.pow(*k)?,
        })
    }
}

fn prime_exponents(q: &Rational) -> Vec<(u64, i64)> {
    let n = q.numer().abs() * q.denom();
    let bound = n.sqrt().to_u64().unwrap_or(u64::MAX).min(1 << 20) + 1;
    let mut rest = n.clone();
    let mut out = Vec::new();
    for p in primes_in(2, bound) {
        let pb = BigInt::from(p);
        if (&rest % &pb).is_zero() {
            while (&rest % &pb).is_zero() {
                rest /= &pb;
            }
            if let Valuation::Finite(v) = padic_valuation(q, p) {
                out.push((p, v));
            }
        }
    }
    if rest > BigInt::one() {
        let p = rest.to_u64().expect("log argument with a large prime factor");
        if let Valuation::Finite(v) = padic_valuation(q, p) {
            out.push((p, v));
        }
    }
    out
}

impl FromStr for ClosedForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ClosedForm::from_expr(&dsl::parse(s)?)
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coefficient.is_negative();
            let c = t.coefficient.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts = Vec::new();
            if !c.is_one() || t.factors.is_empty() {
                parts.push(format_rational(&c));
            }
            for (k, e) in &t.factors {
                parts.push(if *e == 1 { k.to_string() } else { format!("{k}^{e}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl Serialize for ClosedForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClosedForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a rational literal or a closed form with no constants.
pub fn parse_rational_form(s: &str) -> Result<Rational> {
    if let Ok(q) = parse_rational(s) {
        return Ok(q);
    }
    s.parse::<ClosedForm>()?.as_rational().ok_or_else(|| Error::InvalidArgument(format!("`{s}` is not rational")))
}
