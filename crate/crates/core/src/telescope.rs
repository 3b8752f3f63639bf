//! Finite telescoping identities in a free parameter `m`.
//!
//! Every family has the shape
//!
//! ```text
//! sum_{k=start}^{n} P(m,k)/D(k) * G(k) = c(m) + C(m,n)/E(n) * G(n),
//! G(k) = binom(4k,k)^e / m^k,  e = +-1
//! ```
//!
//! Instances are checked by exact summation. The induction step is checked
//! symbolically: after replacing `G(n-1)/G(n)` by its exact rational form the
//! difference `closed(n) - closed(n-1) - term(n)` becomes a polynomial in
//! `(m, n)` that must vanish identically.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::dsl::{eval_rational, parse, Env, Expr};
use crate::error::{Error, Result};
use crate::exact::{binomial, format_rational, int, rat, rat_pow, Rational};
use crate::poly::{Poly2, QPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FamilyTag {
    #[serde(rename = "L21_K")]
    L21K,
    #[serde(rename = "L21_4K1")]
    L214K1,
    #[serde(rename = "L21_3K1")]
    L213K1,
    #[serde(rename = "L21_3K2")]
    L213K2,
    #[serde(rename = "L36_K1")]
    L36K1,
    #[serde(rename = "L36_3K1")]
    L363K1,
    #[serde(rename = "L36_3K2")]
    L363K2,
    #[serde(rename = "T13_ODD")]
    T13Odd,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 8] = [
        FamilyTag::L21K,
        FamilyTag::L214K1,
        FamilyTag::L213K1,
        FamilyTag::L213K2,
        FamilyTag::L36K1,
        FamilyTag::L363K1,
        FamilyTag::L363K2,
        FamilyTag::T13Odd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyTag::L21K => "L21_K",
            FamilyTag::L214K1 => "L21_4K1",
            FamilyTag::L213K1 => "L21_3K1",
            FamilyTag::L213K2 => "L21_3K2",
            FamilyTag::L36K1 => "L36_K1",
            FamilyTag::L363K1 => "L36_3K1",
            FamilyTag::L363K2 => "L36_3K2",
            FamilyTag::T13Odd => "T13_ODD",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyTag> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown { kind: "telescoping family", name: s.to_string() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TelescopeFamily {
    pub tag: FamilyTag,
    pub start: i64,
    /// Exponent of `binom(4k,k)` in `G(k)`.
    pub binom_exp: i32,
    /// `P(m, k)`, with `k` stored in the second slot.
    pub numerator: Poly2,
    pub denominator: QPoly,
    /// `c(m)`, the limit once `m^n binom(4n,n)^(-e)` blows up.
    pub constant: QPoly,
    pub closed_numerator: Poly2,
    pub closed_denominator: QPoly,
    /// Families stated for a single value of `m`.
    pub fixed_m: Option<Rational>,
    /// The limit holds for `|m|` above this radius.
    pub radius: Rational,
}

fn poly2(e: &Expr) -> Result<Poly2> {
    let bad = || Error::InvalidArgument(format!("not a polynomial in m, n: {e:?}"));
    Ok(match e {
        Expr::Num(n) => Poly2::constant(Rational::from_integer(n.clone())),
        Expr::Var(v) if v == "m" => Poly2::m(),
        Expr::Var(v) if v == "n" || v == "k" => Poly2::n(),
        Expr::Add(a, b) => poly2(a)?.add(&poly2(b)?),
        Expr::Sub(a, b) => poly2(a)?.sub(&poly2(b)?),
        Expr::Mul(a, b) => poly2(a)?.mul(&poly2(b)?),
        Expr::Neg(a) => poly2(a)?.neg(),
        Expr::Pow(a, k) if *k >= 0 => poly2(a)?.pow(*k as u32),
        Expr::Div(a, b) => {
            let d = eval_rational(b, &Env::new()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            poly2(a)?.scale(&(Rational::one() / d))
        }
        _ => return Err(bad()),
    })
}

fn p2(src: &str) -> Poly2 {
    poly2(&parse(src).expect("family source parses")).expect("family source is polynomial")
}

/// Univariate view of a `Poly2` that only involves one variable.
fn univariate(p: &Poly2, in_m: bool) -> QPoly {
    let deg = p.total_degree() as usize;
    let mut c = vec![Rational::zero(); deg + 1];
    for (&(i, j), v) in p.terms() {
        let e = if in_m { i } else { j } as usize;
        c[e] += v;
    }
    QPoly::new(c)
}

fn np(src: &str) -> QPoly {
    univariate(&p2(src), false)
}

fn mp(src: &str) -> QPoly {
    univariate(&p2(src), true)
}

impl TelescopeFamily {
    pub fn get(tag: FamilyTag) -> TelescopeFamily {
        let l21 = |num: &str, den: &str, c: &str, cn: &str, cd: &str| TelescopeFamily {
            tag,
            start: 1,
            binom_exp: -1,
            numerator: p2(num),
            denominator: np(den),
            constant: mp(c),
            closed_numerator: p2(cn),
            closed_denominator: np(cd),
            fixed_m: None,
            radius: rat(27, 256),
        };
        let l36 = |num: &str, den: &str, c: &str, cd: &str| TelescopeFamily {
            tag,
            start: 0,
            binom_exp: 1,
            numerator: p2(num),
            denominator: np(den),
            constant: mp(c),
            closed_numerator: p2("8(2n+1)(4n+1)(4n+3)"),
            closed_denominator: np(cd),
            fixed_m: None,
            radius: rat(256, 27),
        };
        match tag {
            FamilyTag::L21K => l21(
                "(256m-27)k^3-3(128m+9)k^2+2(88m-3)k-24m",
                "k",
                "6",
                "-3(3n+1)(3n+2)",
                "1",
            ),
            FamilyTag::L214K1 => l21(
                "(256m-27)k^3-2(64m+27)k^2-(16m+33)k+8m-6",
                "4k+1",
                "6",
                "-3(n+1)(3n+1)(3n+2)",
                "4n+1",
            ),
            FamilyTag::L213K1 => {
                l21("(256m-27)k^3-384m*k^2+(176m+3)k-24m", "k(3k-1)", "3", "-3(3n+1)", "1")
            }
            FamilyTag::L213K2 => l21(
                "(256m-27)k^3-3(128m-9)k^2+2(88m-3)k-24m",
                "k(3k-1)(3k-2)",
                "3",
                "-3",
                "1",
            ),
            FamilyTag::L36K1 => l36("(256-27m)k^3+384k^2+(176+21m)k-6m+24", "k+1", "-6m", "n+1"),
            FamilyTag::L363K1 => l36("(256-27m)k^3+384k^2+(176+3m)k+24", "3k+1", "0", "3n+1"),
            FamilyTag::L363K2 => l36(
                "(256-27m)k^3+3(128-9m)k^2+2(88-3m)k+24",
                "(3k+1)(3k+2)",
                "0",
                "(3n+1)(3n+2)",
            ),
            FamilyTag::T13Odd => TelescopeFamily {
                tag,
                start: 0,
                binom_exp: 1,
                numerator: p2("2k(11k^2-14k+4)+22k^2-18k+3"),
                denominator: np("(2k-1)(4k-1)(4k-3)"),
                constant: mp("0"),
                closed_numerator: p2("-1"),
                closed_denominator: np("1"),
                fixed_m: Some(int(16)),
                radius: rat(256, 27),
            },
        }
    }

    pub fn all() -> Vec<TelescopeFamily> {
        FamilyTag::ALL.into_iter().map(TelescopeFamily::get).collect()
    }

    fn check_m(&self, m: &Rational) -> Result<()> {
        if m.is_zero() {
            return Err(Error::InvalidArgument("m must be nonzero".into()));
        }
        match &self.fixed_m {
            Some(f) if f != m => Err(Error::InvalidArgument(format!(
                "{} is stated only for m = {}",
                self.tag,
                format_rational(f)
            ))),
            _ => Ok(()),
        }
    }

    /// `binom(4k,k)^e / m^k`.
    fn g(&self, m: &Rational, k: i64) -> Rational {
        let b = Rational::from_integer(binomial(4 * k as u64, k as u64));
        rat_pow(&b, self.binom_exp as i64) / rat_pow(m, k)
    }

    pub fn term(&self, m: &Rational, k: i64) -> Result<Rational> {
        self.check_m(m)?;
        let kk = int(k);
        let d = self.denominator.eval(&kk);
        if d.is_zero() {
            return Err(Error::DenominatorRoot { k });
        }
        Ok(self.numerator.eval(m, &kk) / d * self.g(m, k))
    }

    pub fn partial_sum_exact(&self, m: &Rational, n: i64) -> Result<Rational> {
        let mut acc = Rational::zero();
        for k in self.start..=n {
            acc += self.term(m, k)?;
        }
        Ok(acc)
    }

    pub fn closed_form_partial(&self, m: &Rational, n: i64) -> Result<Rational> {
        self.check_m(m)?;
        let nn = int(n);
        let e = self.closed_denominator.eval(&nn);
        if e.is_zero() {
            return Err(Error::DenominatorRoot { k: n });
        }
        Ok(self.constant.eval(m) + self.closed_numerator.eval(m, &nn) / e * self.g(m, n))
    }

    /// `lim_{n -> inf}` of the closed form for admissible `m`.
    pub fn limit(&self, m: &Rational) -> Rational {
        self.constant.eval(m)
    }

    /// Symbolic `m`, or the single value the family is stated for.
    fn m_symbol(&self) -> Poly2 {
        match &self.fixed_m {
            Some(v) => Poly2::constant(v.clone()),
            None => Poly2::m(),
        }
    }

    fn fix(&self, p: &Poly2) -> Poly2 {
        match &self.fixed_m {
            Some(v) => p.eval_m(v),
            None => p.clone(),
        }
    }
}

/// `binom(4n,n) / binom(4n-4,n-1)` as numerator and denominator in `n`.
pub fn binomial_step() -> (QPoly, QPoly) {
    (np("4n(4n-1)(4n-2)(4n-3)"), np("n(3n)(3n-1)(3n-2)"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InductionReport {
    pub family: FamilyTag,
    /// `closed(start) - term(start)` times `m^start`, as a polynomial in `m`.
    pub base_residual: String,
    /// Cleared-denominator form of `closed(n) - closed(n-1) - term(n)`.
    pub step_residual: String,
    pub pass: bool,
}

pub fn verify_induction_step(f: &TelescopeFamily) -> InductionReport {
    let (rn, rd) = binomial_step();
    let (rn, rd) = (Poly2::from_n(&rn), Poly2::from_n(&rd));
    // G(n-1)/G(n) = m * up / down
    let (up, down) = if f.binom_exp < 0 { (rn, rd) } else { (rd, rn) };
    let lift = Poly2::from_n;
    let c = f.fix(&f.closed_numerator);
    let p = f.fix(&f.numerator);
    let (d, e) = (lift(&f.denominator), lift(&f.closed_denominator));
    let (c1, e1) = (c.shift_n(-1), e.shift_n(-1));
    let step = c
        .mul(&d)
        .mul(&e1)
        .mul(&down)
        .sub(&p.mul(&e).mul(&e1).mul(&down))
        .sub(&f.m_symbol().mul(&up).mul(&c1).mul(&e).mul(&d));

    // base case: m^s c(m) + (C(m,s)/E(s) - P(m,s)/D(s)) binom(4s,s)^e
    let s = int(f.start);
    let b = Rational::from_integer(binomial(4 * f.start as u64, f.start as u64));
    let be = rat_pow(&b, f.binom_exp as i64);
    let ms = f.m_symbol().pow(f.start as u32);
    let cm = f.fix(&Poly2::from_m(&f.constant));
    let base = ms
        .mul(&cm)
        .add(&c.eval_n(&s).scale(&(be.clone() / f.closed_denominator.eval(&s))))
        .sub(&p.eval_n(&s).scale(&(be / f.denominator.eval(&s))));

    InductionReport {
        family: f.tag,
        base_residual: base.to_string(),
        step_residual: step.to_string(),
        pass: base.is_zero() && step.is_zero(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub family: FamilyTag,
    pub checked: usize,
    pub skipped: Vec<String>,
    /// First `(m, n)` where the exact sum and the closed form differ.
    pub failure: Option<(String, i64)>,
    pub pass: bool,
}

/// Compares running exact sums with the closed form for every `n <= n_max`.
/// Values of `m` outside a fixed-`m` family are skipped and listed.
pub fn verify_instances(f: &TelescopeFamily, ms: &[Rational], n_max: i64) -> Result<InstanceReport> {
    let mut checked = 0;
    let mut skipped = Vec::new();
    for m in ms {
        if f.fixed_m.as_ref().is_some_and(|v| v != m) || m.is_zero() {
            skipped.push(format_rational(m));
            continue;
        }
        let mut acc = Rational::zero();
        for n in f.start..=n_max {
            acc += f.term(m, n)?;
            checked += 1;
            if acc != f.closed_form_partial(m, n)? {
                return Ok(InstanceReport {
                    family: f.tag,
                    checked,
                    skipped,
                    failure: Some((format_rational(m), n)),
                    pass: false,
                });
            }
        }
    }
    Ok(InstanceReport { family: f.tag, checked, skipped, failure: None, pass: true })
}

/// The `m` values the identities are specialised at.
pub fn standard_m_values() -> Vec<Rational> {
    vec![int(1), int(-8), rat(1, 8), rat(8, 9), int(-2), int(-24), int(-192), int(16), int(3)]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub checked_up_to: i64,
    pub first_failure: Option<i64>,
    pub symbolic_residual: String,
    pub pass: bool,
}

/// `3k binom(4k,k)/((2k-1)(4k-1)(4k-3)) = 8 binom(4k-4,k-1)/((3k-2)(3k-1))`.
pub fn verify_shift_identity(k_max: i64) -> ShiftReport {
    let lhs = |k: i64| {
        rat(3 * k, 1) * Rational::from_integer(binomial(4 * k as u64, k as u64)) / rat((2 * k - 1) * (4 * k - 1) * (4 * k - 3), 1)
    };
    let rhs = |k: i64| {
        rat(8, 1) * Rational::from_integer(binomial(4 * (k - 1) as u64, (k - 1) as u64)) / rat((3 * k - 2) * (3 * k - 1), 1)
    };
    let first_failure = (1..=k_max).find(|&k| lhs(k) != rhs(k));
    let (rn, rd) = binomial_step();
    let residual = np("3k").mul(&rn).mul(&np("(3k-2)(3k-1)")).sub(&np("8").mul(&rd).mul(&np("(2k-1)(4k-1)(4k-3)")));
    ShiftReport {
        checked_up_to: k_max,
        first_failure,
        symbolic_residual: residual.to_string(),
        pass: first_failure.is_none() && residual.is_zero(),
    }
}
