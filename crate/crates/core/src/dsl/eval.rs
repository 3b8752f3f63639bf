use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Expr;
use crate::error::{Error, Result};
use crate::exact::{
    bernoulli_number, bernoulli_poly, binomial_signed, euler_number, euler_poly, fermat_quotient, harmonic,
    harmonic_gap, legendre_symbol, rat_pow, HarmonicSpec, Rational,
};
use crate::poly::{QPoly, QRatFunc};

fn semantic(message: impl Into<String>) -> Error {
    Error::Semantic { id: String::new(), message: message.into() }
}

/// Variable bindings for [`eval_rational`].
#[derive(Clone, Debug, Default)]
pub struct Env {
    vars: Vec<(String, Rational)>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with(mut self, name: &str, value: Rational) -> Self {
        self.vars.retain(|(n, _)| n != name);
        self.vars.push((name.to_string(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

fn to_i64(q: &Rational, what: &str) -> Result<i64> {
    if !q.is_integer() {
        return Err(semantic(format!("{what} must be an integer, got {q}")));
    }
    q.to_integer().to_i64().ok_or_else(|| semantic(format!("{what} out of range")))
}

fn to_u64(q: &Rational, what: &str) -> Result<u64> {
    let v = to_i64(q, what)?;
    u64::try_from(v).map_err(|_| semantic(format!("{what} must be nonnegative, got {v}")))
}

fn arity(name: &str, args: &[Expr], n: &[usize]) -> Result<()> {
    if n.contains(&args.len()) {
        Ok(())
    } else {
        Err(semantic(format!("`{name}` takes {n:?} arguments, got {}", args.len())))
    }
}

/// Exact evaluation with the arithmetic alphabet of the congruence claims:
/// `binom, qp, leg, B, Bpoly, E, Epoly, H, Hgap`.
pub fn eval_rational(e: &Expr, env: &Env) -> Result<Rational> {
    Ok(match e {
        Expr::Num(n) => Rational::from_integer(n.clone()),
        Expr::Var(v) => env.get(v).cloned().ok_or_else(|| semantic(format!("unbound variable `{v}`")))?,
        Expr::Add(a, b) => eval_rational(a, env)? + eval_rational(b, env)?,
        Expr::Sub(a, b) => eval_rational(a, env)? - eval_rational(b, env)?,
        Expr::Mul(a, b) => eval_rational(a, env)? * eval_rational(b, env)?,
        Expr::Div(a, b) => {
            let d = eval_rational(b, env)?;
            if d.is_zero() {
                return Err(semantic("division by zero"));
            }
            eval_rational(a, env)? / d
        }
        Expr::Neg(a) => -eval_rational(a, env)?,
        Expr::Pow(a, k) => {
            let b = eval_rational(a, env)?;
            if b.is_zero() && *k < 0 {
                return Err(semantic("zero raised to a negative power"));
            }
            rat_pow(&b, *k)
        }
        Expr::Call(name, args) => {
            let vals = args.iter().map(|a| eval_rational(a, env)).collect::<Result<Vec<_>>>()?;
            match name.as_str() {
                "binom" => {
                    arity(name, args, &[2])?;
                    Rational::from_integer(binomial_signed(to_i64(&vals[0], "binom top")?, to_i64(&vals[1], "binom bottom")?))
                }
                "qp" => {
                    arity(name, args, &[1])?;
                    let p = env.get("p").ok_or_else(|| semantic("qp needs the prime `p` bound"))?;
                    Rational::from_integer(fermat_quotient(to_i64(&vals[0], "qp argument")?, to_u64(p, "p")?)?)
                }
                "leg" => {
                    arity(name, args, &[2])?;
                    let s = legendre_symbol(to_i64(&vals[0], "Legendre numerator")?, to_u64(&vals[1], "Legendre modulus")?)?;
                    Rational::from_integer(BigInt::from(s))
                }
                "B" => {
                    arity(name, args, &[1])?;
                    bernoulli_number(to_u64(&vals[0], "Bernoulli index")?)
                }
                "Bpoly" => {
                    arity(name, args, &[2])?;
                    bernoulli_poly(to_u64(&vals[0], "Bernoulli index")?, &vals[1])
                }
                "E" => {
                    arity(name, args, &[1])?;
                    Rational::from_integer(euler_number(to_u64(&vals[0], "Euler index")?))
                }
                "Epoly" => {
                    arity(name, args, &[2])?;
                    euler_poly(to_u64(&vals[0], "Euler index")?, &vals[1])
                }
                "H" => {
                    arity(name, args, &[1, 2])?;
                    let m = if vals.len() == 2 { to_u64(&vals[1], "harmonic order")? as u32 } else { 1 };
                    if m == 0 {
                        return Err(semantic("harmonic order must be positive"));
                    }
                    harmonic(to_u64(&vals[0], "harmonic argument")?, m)
                }
                "Hgap" => {
                    arity(name, args, &[1])?;
                    harmonic_gap(to_u64(&vals[0], "harmonic argument")?)
                }
                other => return Err(Error::Unknown { kind: "function", name: other.to_string() }),
            }
        }
    })
}

/// Interprets `e` as a polynomial in `var`; division only by constants.
pub fn to_poly(e: &Expr, var: &str) -> Result<QPoly> {
    let f = to_ratfunc(e, var)?;
    if !f.is_polynomial() {
        return Err(semantic(format!("`{e}` is not a polynomial in {var}")));
    }
    let c = f.den().coeff(0).recip();
    Ok(f.num().scale(&c))
}

/// Interprets `e` as a rational function of `var`.
pub fn to_ratfunc(e: &Expr, var: &str) -> Result<QRatFunc> {
    Ok(match e {
        Expr::Num(n) => QRatFunc::constant(Rational::from_integer(n.clone())),
        Expr::Var(v) if v == var => QRatFunc::from_poly(QPoly::x()),
        Expr::Var(v) => return Err(semantic(format!("unexpected variable `{v}` (expected `{var}`)"))),
        Expr::Add(a, b) => to_ratfunc(a, var)?.add(&to_ratfunc(b, var)?),
        Expr::Sub(a, b) => to_ratfunc(a, var)?.sub(&to_ratfunc(b, var)?),
        Expr::Mul(a, b) => to_ratfunc(a, var)?.mul(&to_ratfunc(b, var)?),
        Expr::Div(a, b) => {
            let d = to_ratfunc(b, var)?;
            if d.is_zero() {
                return Err(semantic("division by zero"));
            }
            to_ratfunc(a, var)?.div(&d)
        }
        Expr::Neg(a) => to_ratfunc(a, var)?.neg(),
        Expr::Pow(a, k) => {
            let b = to_ratfunc(a, var)?;
            if b.is_zero() && *k < 0 {
                return Err(semantic("zero raised to a negative power"));
            }
            b.pow(*k as i32)
        }
        Expr::Call(..) => QRatFunc::constant(eval_rational(e, &Env::new())?),
    })
}

/// A summand weight `constant(k) + sum_i coeff_i(k) * H_i(k)`; harmonic
/// numbers may only enter linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicLinear {
    pub constant: QRatFunc,
    pub terms: BTreeMap<HarmonicSpec, QRatFunc>,
}

impl HarmonicLinear {
    fn constant(c: QRatFunc) -> Self {
        HarmonicLinear { constant: c, terms: BTreeMap::new() }
    }

    fn is_plain(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(mut self, o: HarmonicLinear, sign: i32) -> Self {
        let o = if sign < 0 { o.scale(&QRatFunc::constant(-Rational::one())) } else { o };
        self.constant = self.constant.add(&o.constant);
        for (h, c) in o.terms {
            let e = self.terms.entry(h).or_insert_with(QRatFunc::zero);
            *e = e.add(&c);
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    fn scale(mut self, f: &QRatFunc) -> Self {
        self.constant = self.constant.mul(f);
        for c in self.terms.values_mut() {
            *c = c.mul(f);
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }
}

fn affine_arg(e: &Expr, var: &str) -> Result<(u32, i64)> {
    let p = to_poly(e, var)?;
    if p.degree().unwrap_or(0) > 1 || p.coeffs().iter().any(|c| !c.is_integer()) {
        return Err(semantic(format!("harmonic argument `{e}` must be an integer affine function of {var}")));
    }
    let slope = p.coeff(1).to_integer();
    let offset = p.coeff(0).to_integer();
    if slope.is_negative() {
        return Err(semantic(format!("harmonic argument `{e}` decreases in {var}")));
    }
    Ok((slope.to_u32().ok_or_else(|| semantic("slope too large"))?, offset.to_i64().ok_or_else(|| semantic("offset too large"))?))
}

/// Splits a weight expression into its harmonic-free part and the
/// coefficients of each harmonic number it mentions (`H(arg)`, `H(arg, m)`,
/// and `Hgap(arg) = 2H(4 arg) - 3H(2 arg) + H(arg)`).
pub fn to_harmonic_linear(e: &Expr, var: &str) -> Result<HarmonicLinear> {
    let one = || QRatFunc::one();
    Ok(match e {
        Expr::Call(name, args) if name == "H" => {
            arity(name, args, &[1, 2])?;
            let (slope, offset) = affine_arg(&args[0], var)?;
            let order = if args.len() == 2 { to_u64(&eval_rational(&args[1], &Env::new())?, "harmonic order")? as u32 } else { 1 };
            if order == 0 {
                return Err(semantic("harmonic order must be positive"));
            }
            let mut terms = BTreeMap::new();
            terms.insert(HarmonicSpec { order, slope, offset }, one());
            HarmonicLinear { constant: QRatFunc::zero(), terms }
        }
        Expr::Call(name, args) if name == "Hgap" => {
            arity(name, args, &[1])?;
            let (slope, offset) = affine_arg(&args[0], var)?;
            let mut terms = BTreeMap::new();
            for (mult, w) in [(4u32, 2i64), (2, -3), (1, 1)] {
                let spec = HarmonicSpec { order: 1, slope: slope * mult, offset: offset * mult as i64 };
                terms.insert(spec, QRatFunc::constant(Rational::from_integer(w.into())));
            }
            HarmonicLinear { constant: QRatFunc::zero(), terms }
        }
        Expr::Add(a, b) => to_harmonic_linear(a, var)?.add(to_harmonic_linear(b, var)?, 1),
        Expr::Sub(a, b) => to_harmonic_linear(a, var)?.add(to_harmonic_linear(b, var)?, -1),
        Expr::Neg(a) => to_harmonic_linear(a, var)?.scale(&QRatFunc::constant(-Rational::one())),
        Expr::Mul(a, b) => {
            let (x, y) = (to_harmonic_linear(a, var)?, to_harmonic_linear(b, var)?);
            match (x.is_plain(), y.is_plain()) {
                (true, _) => y.scale(&x.constant),
                (_, true) => x.scale(&y.constant),
                _ => return Err(semantic(format!("product of harmonic numbers in `{e}` is not supported"))),
            }
        }
        Expr::Div(a, b) => {
            let d = to_harmonic_linear(b, var)?;
            if !d.is_plain() {
                return Err(semantic(format!("harmonic number in a denominator in `{e}`")));
            }
            if d.constant.is_zero() {
                return Err(semantic("division by zero"));
            }
            to_harmonic_linear(a, var)?.scale(&one().div(&d.constant))
        }
        Expr::Pow(a, _) => {
            let b = to_harmonic_linear(a, var)?;
            if !b.is_plain() {
                return Err(semantic(format!("power of a harmonic number in `{e}`")));
            }
            HarmonicLinear::constant(to_ratfunc(e, var)?)
        }
        _ => HarmonicLinear::constant(to_ratfunc(e, var)?),
    })
}
