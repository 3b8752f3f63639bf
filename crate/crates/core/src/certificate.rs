//! Exact checks of the calculus behind the integral proofs.
//!
//! A certificate bundles a polynomial `P(k)`, the substitution
//! `z = c x^s (1 - x)` that turns the beta-integral representation into a
//! rational integrand, and an elementary antiderivative. Every algebraic stage
//! is checked with zero residual over `Q(sqrt d)`. Only the final endpoint
//! values are numeric, and those are cross-checked by an independent
//! rigorous quadrature.

use std::cmp::Ordering;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::ball::{bits_for_digits, const_log, const_pi, const_sqrt, rational_to_f64, Ball};
use crate::closed_form::ClosedForm;
use crate::dsl::{self, eval_rational, to_poly, to_ratfunc, Env, Expr};
use crate::error::{Error, Result};
use crate::exact::{binomial, int, rat, Rational};
use crate::identity::{Antiderivative, CertificateSpec, MomentSpec};
use crate::poly::{self as poly_mod, count_real_roots, isolate_real_roots, Poly, QPoly, QRatFunc, RatFunc};
use crate::series::BallSummary;

/// `a + b sqrt(d)`. Rational values carry `d = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    pub a: Rational,
    pub b: Rational,
    pub d: u64,
}

impl Quad {
    pub fn new(a: Rational, b: Rational, d: u64) -> Quad {
        if b.is_zero() {
            Quad { a, b, d: 0 }
        } else {
            assert!(d > 1, "sqrt({d}) is not irrational");
            Quad { a, b, d }
        }
    }

    pub fn rational(a: Rational) -> Quad {
        Quad { a, b: Rational::zero(), d: 0 }
    }

    /// `sqrt(d)` itself.
    pub fn root(d: u64) -> Quad {
        Quad::new(Rational::zero(), Rational::one(), d)
    }

    fn join(&self, o: &Quad) -> u64 {
        match (self.d, o.d) {
            (0, d) | (d, 0) => d,
            (x, y) => {
                assert_eq!(x, y, "mixing sqrt({x}) and sqrt({y})");
                x
            }
        }
    }

    pub fn conj(&self) -> Quad {
        Quad::new(self.a.clone(), -&self.b, self.d)
    }

    /// `a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * int(self.d as i64)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.b.is_zero().then(|| self.a.clone())
    }

    /// Exact sign of `a + b sqrt(d)`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal || sa == sb {
            return sa;
        }
        if sa == Ordering::Equal {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * int(self.d as i64);
        if a2 > db2 {
            sa
        } else {
            sb
        }
    }

    pub fn to_ball(&self, prec: u32) -> Result<Ball> {
        let a = Ball::from_rational(&self.a, prec);
        if self.b.is_zero() {
            return Ok(a);
        }
        Ok(a.add(&const_sqrt(&int(self.d as i64), prec + 8)?.mul_rat(&self.b).with_prec(prec)))
    }
}

impl poly_mod::Field for Quad {
    fn zero() -> Self {
        Quad::rational(<Rational as Zero>::zero())
    }
    fn one() -> Self {
        Quad::rational(<Rational as One>::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn add(&self, o: &Self) -> Self {
        Quad::new(&self.a + &o.a, &self.b + &o.b, self.join(o))
    }
    fn sub(&self, o: &Self) -> Self {
        Quad::new(&self.a - &o.a, &self.b - &o.b, self.join(o))
    }
    fn mul(&self, o: &Self) -> Self {
        let d = self.join(o);
        let a = &self.a * &o.a + &self.b * &o.b * int(d as i64);
        Quad::new(a, &self.a * &o.b + &self.b * &o.a, d)
    }
    fn neg(&self) -> Self {
        Quad::new(-&self.a, -&self.b, self.d)
    }
    fn inv(&self) -> Self {
        let n = self.norm();
        let c = self.conj();
        Quad::new(c.a / &n, c.b / n, self.d)
    }
    fn from_rational(q: &Rational) -> Self {
        Quad::rational(q.clone())
    }
}

pub type SPoly = Poly<Quad>;
pub type SRatFunc = RatFunc<Quad>;

fn semantic(id: &str, m: impl Into<String>) -> Error {
    Error::Semantic { id: id.to_string(), message: m.into() }
}

/// Reads a DSL expression in `x` whose coefficients may mention `s = sqrt(d)`.
pub fn to_sratfunc(e: &Expr, d: u64) -> Result<SRatFunc> {
    let bad = |m: String| semantic("certificate", m);
    Ok(match e {
        Expr::Num(n) => SRatFunc::constant(Quad::rational(Rational::from_integer(n.clone()))),
        Expr::Var(v) if v == "x" => SRatFunc::from_poly(SPoly::x()),
        Expr::Var(v) if v == "s" && d > 1 => SRatFunc::constant(Quad::root(d)),
        Expr::Var(v) => return Err(bad(format!("unexpected variable `{v}`"))),
        Expr::Add(a, b) => to_sratfunc(a, d)?.add(&to_sratfunc(b, d)?),
        Expr::Sub(a, b) => to_sratfunc(a, d)?.sub(&to_sratfunc(b, d)?),
        Expr::Mul(a, b) => to_sratfunc(a, d)?.mul(&to_sratfunc(b, d)?),
        Expr::Div(a, b) => {
            let q = to_sratfunc(b, d)?;
            if q.is_zero() {
                return Err(bad("division by zero".into()));
            }
            to_sratfunc(a, d)?.div(&q)
        }
        Expr::Neg(a) => to_sratfunc(a, d)?.neg(),
        Expr::Pow(a, k) => {
            let b = to_sratfunc(a, d)?;
            if b.is_zero() && *k < 0 {
                return Err(bad("zero raised to a negative power".into()));
            }
            b.pow(*k as i32)
        }
        Expr::Call(..) => SRatFunc::constant(Quad::rational(eval_rational(e, &Env::new())?)),
    })
}

fn constant_of(f: &SRatFunc) -> Option<Quad> {
    (f.num().degree().unwrap_or(0) == 0 && f.den().degree() == Some(0)).then(|| poly_mod::Field::div(&f.num().coeff(0), &f.den().coeff(0)))
}

fn rational_poly(p: &SPoly) -> Option<QPoly> {
    p.coeffs().iter().map(Quad::as_rational).collect::<Option<Vec<_>>>().map(QPoly::new)
}

/// `p * conj(p)`, which has rational coefficients and vanishes wherever `p` does.
pub fn norm_poly(p: &SPoly) -> QPoly {
    rational_poly(&p.mul(&p.map(Quad::conj))).expect("norm has rational coefficients")
}

pub fn rational_function(f: &SRatFunc) -> Option<QRatFunc> {
    Some(QRatFunc::new(rational_poly(f.num())?, rational_poly(f.den())?))
}

/// `rational + sum c_i log(g_i) + sum c_j atan(u_j)` over `Q(sqrt d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryExpr {
    pub d: u64,
    pub rational: SRatFunc,
    pub logs: Vec<(Quad, SRatFunc)>,
    pub arctans: Vec<(Quad, SRatFunc)>,
}

impl ElementaryExpr {
    pub fn from_spec(a: &Antiderivative, d: u64) -> Result<ElementaryExpr> {
        let parse = |s: &str| to_sratfunc(&dsl::parse(s)?, d);
        let coeff = |s: &str| {
            constant_of(&parse(s)?).ok_or_else(|| semantic("certificate", format!("coefficient `{s}` depends on x")))
        };
        Ok(ElementaryExpr {
            d,
            rational: parse(&a.rational)?,
            logs: a.logs.iter().map(|t| Ok((coeff(&t.coefficient)?, parse(&t.argument)?))).collect::<Result<_>>()?,
            arctans: a.arctans.iter().map(|t| Ok((coeff(&t.coefficient)?, parse(&t.argument)?))).collect::<Result<_>>()?,
        })
    }

    /// Value at a rational point where every part is finite; logs use `|g|`.
    pub fn eval(&self, x: &Rational, prec: u32) -> Result<Ball> {
        let w = prec + 16;
        let xq = Quad::rational(x.clone());
        let pole = || semantic("certificate", format!("antiderivative is singular at x = {x}"));
        let mut acc = self.rational.eval(&xq).ok_or_else(pole)?.to_ball(w)?;
        for (c, g) in &self.logs {
            let v = g.eval(&xq).ok_or_else(pole)?;
            let q = v.as_rational().ok_or_else(|| semantic("certificate", "log argument is irrational at an endpoint"))?;
            if q.is_zero() {
                return Err(pole());
            }
            let q = q.abs();
            if !q.is_one() {
                acc = acc.add(&const_log(&q, w)?.mul(&c.to_ball(w)?));
            }
        }
        for (c, u) in &self.arctans {
            let v = u.eval(&xq).ok_or_else(pole)?.to_ball(w + 8)?;
            acc = acc.add(&v.atan().with_prec(w).mul(&c.to_ball(w)?));
        }
        Ok(acc.with_prec(prec))
    }
}

/// Exact `d/dx F`.
pub fn differentiate_elementary(f: &ElementaryExpr) -> SRatFunc {
    let mut acc = f.rational.derivative();
    for (c, g) in &f.logs {
        acc = acc.add(&g.derivative().div(g).scale(c));
    }
    for (c, u) in &f.arctans {
        let one_plus = SRatFunc::one().add(&u.mul(u));
        acc = acc.add(&u.derivative().div(&one_plus).scale(c));
    }
    acc
}

/// `sum_{k >= start} P(k) z^(k - start)` as a rational function of `z`, from
/// the forward differences of `P(k + start)`:
/// `sum_m Q(m) z^m = sum_j (Delta^j Q)(0) z^j / (1 - z)^(j + 1)`.
pub fn geometric_moment_closed_form(p: &QPoly, start: i64) -> QRatFunc {
    let q = p.shift(&int(start));
    let deg = q.degree().unwrap_or(0);
    let mut vals: Vec<Rational> = (0..=deg).map(|m| q.eval(&int(m as i64))).collect();
    let one_minus = QPoly::linear(-Rational::one(), Rational::one());
    let mut acc = QRatFunc::zero();
    for j in 0..=deg {
        let term = QRatFunc::new(QPoly::monomial(vals[0].clone(), j), one_minus.pow(j as u32 + 1));
        acc = acc.add(&term);
        vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    acc
}

/// `prefactor(x) * r(c x^power (1 - x))`.
pub fn substitute_and_normalize(r: &QRatFunc, c: &Rational, power: u32, prefactor: &QRatFunc) -> QRatFunc {
    let z = QPoly::monomial(c.clone(), power as usize).mul(&QPoly::linear(-Rational::one(), Rational::one()));
    r.compose_poly(&z).mul(prefactor)
}

/// Taylor coefficients at 0 up to `x^order`; the denominator must not vanish there.
pub fn taylor_prefix(r: &QRatFunc, order: usize) -> Option<Vec<Rational>> {
    let d0 = r.den().coeff(0);
    if d0.is_zero() {
        return None;
    }
    let mut out: Vec<Rational> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut v = r.num().coeff(n);
        for i in 1..=n.min(r.den().degree().unwrap_or(0)) {
            v -= r.den().coeff(i) * &out[n - i];
        }
        out.push(v / &d0);
    }
    Some(out)
}

/// The moment series summed term by term, truncated at `x^order`.
fn moment_series_prefix(m: &MomentSpec, p: &QPoly, c: &Rational, prefactor: &QRatFunc, order: usize) -> Option<Vec<Rational>> {
    let z = QPoly::monomial(c.clone(), m.power as usize).mul(&QPoly::linear(-Rational::one(), Rational::one()));
    let trunc = |q: QPoly| QPoly::new(q.coeffs().iter().take(order + 1).cloned().collect());
    let mut sum = QPoly::zero();
    let mut zk = QPoly::one();
    let mut k = m.start;
    while (k - m.start) as usize * (m.power as usize) <= order {
        sum = sum.add(&zk.scale(&p.eval(&int(k))));
        zk = trunc(zk.mul(&z));
        k += 1;
    }
    let pre = taylor_prefix(prefactor, order)?;
    let mut out = vec![Rational::zero(); order + 1];
    for (i, a) in pre.iter().enumerate() {
        for (j, b) in sum.coeffs().iter().enumerate() {
            if i + j <= order {
                out[i + j] += a * b;
            }
        }
    }
    Some(out)
}

fn closed_count(p: &QPoly, a: &Rational, b: &Rational) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    count_real_roots(p, a, b) + usize::from(p.eval(a).is_zero())
}

/// A pole of an arctan argument inside `(0, 1)` where the antiderivative jumps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchPoint {
    /// Index of the arctan term.
    pub term: usize,
    pub lo: String,
    pub hi: String,
    pub approx: f64,
    /// `F(r+) - F(r-)` in units of `pi`.
    pub jump_over_pi: String,
    #[serde(skip)]
    jump: Quad,
}

/// Narrows `(lo, hi]`, which holds one root of `e`, until `e` has exactly that
/// root in the closed interval, no root at its ends, and `n` has no root in it.
fn separate(e: &QPoly, n: &QPoly, mut lo: Rational, mut hi: Rational) -> Option<(Rational, Rational)> {
    let good = |a: &Rational, b: &Rational| {
        !e.eval(a).is_zero() && !e.eval(b).is_zero() && closed_count(e, a, b) == 1 && closed_count(n, a, b) == 0
    };
    let mut rational_root: Option<Rational> = e.eval(&hi).is_zero().then(|| hi.clone());
    for _ in 0..4000 {
        if let Some(r) = &rational_root {
            let delta = (&hi - &lo) / int(2);
            lo = r - &delta;
            hi = r + &delta;
        } else {
            let mid = (&lo + &hi) / int(2);
            if e.eval(&mid).is_zero() && count_real_roots(e, &lo, &mid) == 1 {
                rational_root = Some(mid);
                continue;
            }
            if count_real_roots(e, &lo, &mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if good(&lo, &hi) {
            return Some((lo, hi));
        }
    }
    None
}

/// Jumps of the arctan terms across poles of their arguments in `(0, 1)`,
/// found by exact root isolation on the norm of each denominator.
pub fn branch_points(f: &ElementaryExpr) -> Result<Vec<BranchPoint>> {
    let mut out = Vec::new();
    let (zero, one) = (Rational::zero(), Rational::one());
    for (idx, (c, u)) in f.arctans.iter().enumerate() {
        let e = norm_poly(u.den()).square_free();
        let n = norm_poly(u.num()).square_free();
        for (lo, hi) in isolate_real_roots(&e, &zero, &one, &rat(1, 1 << 20)) {
            if hi == one {
                return Err(semantic("certificate", "arctan argument has a pole at x = 1"));
            }
            let (lo, hi) = separate(&e, &n, lo, hi)
                .ok_or_else(|| semantic("certificate", "could not separate an arctan pole from the zeros of its argument"))?;
            let side = |x: &Rational| {
                let q = Quad::rational(x.clone());
                poly_mod::Field::mul(&u.num().eval(&q), &u.den().eval(&q)).signum()
            };
            let (sl, sh) = (side(&lo), side(&hi));
            if sl == sh {
                continue;
            }
            // atan(+inf) - atan(-inf) in units of pi
            let step = if sh == Ordering::Greater { rat(1, 1) } else { rat(-1, 1) };
            let jump = poly_mod::Field::mul(c, &Quad::rational(step));
            out.push(BranchPoint {
                term: idx,
                approx: rational_to_f64(&((&lo + &hi) / int(2))),
                lo: lo.to_string(),
                hi: hi.to_string(),
                jump_over_pi: show_quad(&jump),
                jump,
            });
        }
    }
    Ok(out)
}

fn show_quad(q: &Quad) -> String {
    match (q.a.is_zero(), q.b.is_zero()) {
        (_, true) => q.a.to_string(),
        (true, false) => format!("{}*sqrt({})", q.b, q.d),
        _ => format!("{}+{}*sqrt({})", q.a, q.b, q.d),
    }
}

/// `F(1) - F(0)` minus every jump, i.e. the integral of `F'` over `[0, 1]`.
pub fn corrected_endpoint_difference(f: &ElementaryExpr, branches: &[BranchPoint], prec: u32) -> Result<Ball> {
    let w = prec + 16;
    let mut v = f.eval(&Rational::one(), w)?.sub(&f.eval(&Rational::zero(), w)?);
    let pi = const_pi(w);
    for b in branches {
        v = v.sub(&pi.mul(&b.jump.to_ball(w)?));
    }
    Ok(v.with_prec(prec))
}

/// Smallest dyadic `r` with `r^i >= |e_i|` for all `i >= 1`, so every complex
/// root of `sum e_i t^i + 1` has modulus at least `1 / (2 r)` (Fujiwara).
fn fujiwara_radius(e: &[Rational]) -> Rational {
    let mut guess = 0f64;
    for (i, c) in e.iter().enumerate().skip(1) {
        let v = rational_to_f64(&c.abs());
        if v > 0.0 {
            guess = guess.max(v.powf(1.0 / i as f64));
        }
    }
    let mut r = Rational::from_float(guess * 1.001 + 1e-12).unwrap_or_else(Rational::one);
    while e.iter().enumerate().skip(1).any(|(i, c)| c.abs() > num_traits::pow(r.clone(), i)) {
        r *= rat(9, 8);
    }
    r
}

/// Rigorous `int_a^b f(x) dx` for a rational function with no real pole on
/// `[a, b]`. Each piece is a Taylor polynomial in ball arithmetic; the
/// remainder uses `|[t^n] 1/D(c + t)| <= C(n + m - 1, m - 1) / (|D(c)| R^n)`,
/// where `R` bounds the distance from `c` to every root of `D` and `m = deg D`.
pub fn integrate_rational(f: &QRatFunc, a: &Rational, b: &Rational, digits: u32) -> Result<Ball> {
    let prec = bits_for_digits(digits + 12);
    let tol = Rational::new(BigInt::one(), BigInt::from(10u32).pow(digits + 4));
    let den = f.den();
    let m = den.degree().unwrap_or(0);
    if closed_count(&den.square_free(), a, b) > 0 {
        return Err(semantic("quadrature", "integrand has a real pole on the interval"));
    }
    let total_len = b - a;
    let mut acc = Ball::zero(prec);
    let mut stack = vec![(a.clone(), b.clone())];
    let mut pieces = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        pieces += 1;
        if pieces > 1 << 14 {
            return Err(semantic("quadrature", "too many subintervals"));
        }
        let c = (&lo + &hi) / int(2);
        let h = (&hi - &lo) / int(2);
        let dc = den.shift(&c);
        let d0 = dc.coeff(0);
        let e: Vec<Rational> = dc.coeffs().iter().map(|x| x / &d0).collect();
        let radius = Rational::one() / (fujiwara_radius(&e) * int(2));
        let rho = &radius / &h;
        if rho < int(3) {
            stack.push((c.clone(), hi));
            stack.push((lo, c));
            continue;
        }
        // coefficients in u with x = c + h u, u in [-1, 1]
        let scale = |p: &QPoly| -> Vec<Rational> {
            let mut hp = Rational::one();
            p.coeffs()
                .iter()
                .map(|x| {
                    let v = x * &hp;
                    hp *= &h;
                    v
                })
                .collect()
        };
        let delta = scale(&dc);
        let nu = scale(&f.num().shift(&c));
        let delta_b: Vec<Ball> = delta.iter().map(|x| Ball::from_rational(x, prec)).collect();
        let nu_b: Vec<Ball> = nu.iter().map(|x| Ball::from_rational(x, prec)).collect();
        let inv0 = Ball::from_rational(&delta[0].recip(), prec);

        let nu_mass: Rational = nu.iter().enumerate().map(|(i, x)| x.abs() * num_traits::pow(rho.clone(), i)).sum();
        let lead = nu_mass / delta[0].abs();
        let budget = &tol * &h * int(2) / &total_len;

        let mut beta: Vec<Ball> = Vec::new();
        let mut piece = Ball::zero(prec);
        let mut done = false;
        for n in 0..600usize {
            let mut bn = if n == 0 { inv0.clone() } else { Ball::zero(prec) };
            for i in 1..=n.min(m) {
                bn = bn.sub(&delta_b[i].mul(&beta[n - i]).mul(&inv0));
            }
            beta.push(bn);
            if n % 2 == 0 {
                let mut an = Ball::zero(prec);
                for (i, v) in nu_b.iter().enumerate().take(n + 1) {
                    an = an.add(&v.mul(&beta[n - i]));
                }
                piece = piece.add(&an.mul_rat(&(Rational::from_integer(2.into()) / int(n as i64 + 1))));
            }
            // the sum over u^j with j > n is bounded by lead * sum_{j > n - deg N} C(j+m-1, m-1) rho^-j
            if n >= f.num().degree().unwrap_or(0) + 2 * m + 4 && n % 8 == 0 {
                let j0 = (n - f.num().degree().unwrap_or(0) + 1) as u64;
                let first = Rational::from_integer(binomial(j0 + m as u64 - 1, m as u64 - 1).into())
                    / num_traits::pow(rho.clone(), j0 as usize);
                let q = Rational::from_integer((j0 + m as u64).into()) / (Rational::from_integer((j0 + 1).into()) * &rho);
                if q < Rational::one() {
                    let tail = &lead * first / (Rational::one() - q) * &h * int(2);
                    if tail < budget {
                        acc = acc.add(&piece.mul_rat(&h).add_error(&tail));
                        done = true;
                        break;
                    }
                }
            }
        }
        if !done {
            stack.push((c.clone(), hi));
            stack.push((lo, c));
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub id: String,
    pub anchor: String,
    pub pass: bool,
    pub stages: Vec<Stage>,
    pub branch_points: Vec<BranchPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<BallSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed: Option<BallSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<BallSummary>,
    pub endpoint_digits: u32,
    pub quadrature_digits: u32,
    pub wall_ms: u64,
}

impl CertificateReport {
    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// Digits required for the endpoint and quadrature comparisons.
pub const ENDPOINT_DIGITS: u32 = 30;
pub const QUADRATURE_DIGITS: u32 = 25;

fn agreement(a: &Ball, b: &Ball) -> u32 {
    let diff = a.sub(b).abs_upper();
    if diff.is_zero() {
        return a.prec();
    }
    let scale = b.mid().abs().max(Rational::one());
    (-crate::ball::log10_abs(&(diff / scale))).floor().max(0.0) as u32
}

fn residual_detail(r: &SRatFunc) -> String {
    match rational_function(r) {
        Some(q) if q.is_zero() => "zero residual".into(),
        Some(q) => format!("residual {q}"),
        None => format!(
            "nonzero residual with numerator degree {} over Q(sqrt)",
            r.num().degree().map_or(-1, |d| d as i64)
        ),
    }
}

fn in_z(f: &QRatFunc) -> String {
    f.to_string().replace('x', "z")
}

struct Checker<'a> {
    spec: &'a CertificateSpec,
    stages: Vec<Stage>,
}

impl Checker<'_> {
    fn push(&mut self, name: &'static str, pass: bool, detail: impl Into<String>) {
        self.stages.push(Stage { name, pass, detail: detail.into() });
    }

    fn fail(&mut self, name: &'static str, e: Error) {
        self.push(name, false, e.to_string());
    }

    fn moment(&mut self, m: &MomentSpec, integrand: &QRatFunc) -> Result<()> {
        let p = to_poly(&dsl::parse(&m.polynomial)?, "k")?;
        let closed = geometric_moment_closed_form(&p, m.start);
        match &m.claimed {
            Some(text) => {
                let claimed = to_ratfunc(&dsl::parse(text)?, "z")?;
                let ok = claimed == closed;
                self.push("moment", ok, if ok { in_z(&closed) } else { format!("computed {}, claimed {}", in_z(&closed), in_z(&claimed)) });
            }
            None => self.push("moment", true, in_z(&closed)),
        }
        let c = eval_rational(&dsl::parse(&m.c)?, &Env::new())?;
        let pre = to_ratfunc(&dsl::parse(&m.prefactor)?, "x")?;
        let sub = substitute_and_normalize(&closed, &c, m.power, &pre);
        let ok = &sub == integrand;
        self.push("substitution", ok, if ok { format!("{sub}") } else { format!("substituted {sub}, integrand {integrand}") });

        const ORDER: usize = 30;
        let lhs = moment_series_prefix(m, &p, &c, &pre, ORDER);
        let rhs = taylor_prefix(integrand, ORDER);
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                let first = (0..=ORDER).find(|&i| l[i] != r[i]);
                self.push(
                    "series-prefix",
                    first.is_none(),
                    first.map_or(format!("orders 0..={ORDER} agree"), |i| format!("coefficient of x^{i} differs")),
                );
            }
            _ => self.push("series-prefix", false, "integrand is singular at 0"),
        }
        Ok(())
    }

    fn run(&mut self) -> Result<(Option<Ball>, Option<Ball>, Option<Ball>, Vec<BranchPoint>)> {
        let spec = self.spec;
        let d = spec.sqrt;
        let integrand_s = to_sratfunc(&dsl::parse(&spec.integrand)?, d)?;
        let integrand = rational_function(&integrand_s)
            .ok_or_else(|| semantic(&spec.meta.id, "integrand must have rational coefficients"))?;

        if let Some(m) = &spec.moment {
            if let Err(e) = self.moment(m, &integrand) {
                self.fail("moment", e);
            }
        }

        let f = ElementaryExpr::from_spec(&spec.antiderivative, d)?;
        let scale = eval_rational(&dsl::parse(&spec.scale)?, &Env::new())?;
        let residual = differentiate_elementary(&f).scale(&Quad::rational(scale.clone())).sub(&integrand_s);
        self.push("derivative", residual.is_zero(), residual_detail(&residual));

        if let Some(pf) = &spec.partial_fractions {
            let split = to_sratfunc(&dsl::parse(pf)?, d)?;
            let r = split.sub(&integrand_s);
            self.push("partial-fractions", r.is_zero(), residual_detail(&r));
        }

        let (zero, one) = (Rational::zero(), Rational::one());
        let pole_free = closed_count(&integrand.den().square_free(), &zero, &one) == 0;
        self.push("regularity", pole_free, if pole_free { "no real pole on [0, 1]" } else { "integrand has a real pole on [0, 1]" });

        let mut positive = true;
        for (_, g) in &f.logs {
            let ok = match rational_function(g) {
                Some(q) => {
                    let sign_ok = q.eval(&zero).is_some_and(|v| v.is_positive());
                    sign_ok
                        && closed_count(&q.num().square_free(), &zero, &one) == 0
                        && closed_count(&q.den().square_free(), &zero, &one) == 0
                }
                None => false,
            };
            positive &= ok;
        }
        self.push("log-positivity", positive, if positive { "every log argument is positive on [0, 1]" } else { "a log argument is not positive on [0, 1]" });

        let branches = branch_points(&f)?;
        let prec = bits_for_digits(ENDPOINT_DIGITS + 10);
        let value = corrected_endpoint_difference(&f, &branches, prec)?.mul_rat(&scale);
        let claimed = ClosedForm::from_str(&spec.endpoint)?.eval(prec)?;
        let digits = agreement(&value, &claimed);
        self.push(
            "endpoint",
            digits >= ENDPOINT_DIGITS,
            format!("{} branch correction(s); agrees to {digits} digits", branches.len()),
        );

        let quad = integrate_rational(&integrand, &zero, &one, QUADRATURE_DIGITS + 5)?;
        let qd = agreement(&quad, &value);
        self.push("quadrature", qd >= QUADRATURE_DIGITS, format!("rigorous quadrature agrees to {qd} digits"));
        Ok((Some(value), Some(claimed), Some(quad), branches))
    }
}

/// Runs every stage of a certificate. Errors inside a stage are reported as
/// a failing stage rather than aborting.
pub fn check_certificate(spec: &CertificateSpec) -> CertificateReport {
    let t0 = Instant::now();
    let mut ck = Checker { spec, stages: Vec::new() };
    let (value, claimed, quad, branches) = match ck.run() {
        Ok(v) => v,
        Err(e) => {
            ck.fail("setup", e);
            (None, None, None, Vec::new())
        }
    };
    let summary = |b: &Option<Ball>| b.as_ref().map(|b| BallSummary::new(b, ENDPOINT_DIGITS));
    let endpoint_digits = match (&value, &claimed) {
        (Some(v), Some(c)) => agreement(v, c),
        _ => 0,
    };
    let quadrature_digits = match (&value, &quad) {
        (Some(v), Some(q)) => agreement(q, v),
        _ => 0,
    };
    CertificateReport {
        id: spec.meta.id.clone(),
        anchor: spec.meta.anchor.clone(),
        pass: !ck.stages.is_empty() && ck.stages.iter().all(|s| s.pass),
        endpoint: summary(&value),
        claimed: summary(&claimed),
        quadrature: summary(&quad),
        stages: ck.stages,
        branch_points: branches,
        endpoint_digits,
        quadrature_digits,
        wall_ms: t0.elapsed().as_millis() as u64,
    }
}

/// `B(a, b) = (a-1)! (b-1)! / (a+b-1)!`.
pub fn beta_rational(a: u64, b: u64) -> Rational {
    assert!(a >= 1 && b >= 1, "beta needs positive arguments");
    // (a+b-1)! / ((a-1)! (b-1)!) = a C(a+b-1, a)
    Rational::new(BigInt::one(), BigInt::from(binomial(a + b - 1, a)) * BigInt::from(a))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalEquationReport {
    pub order: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<usize>,
}

fn mul_trunc(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficientwise `(f - 1)(3f + 1)^e = 256 x f^4` up to `x^order`, with
/// `f = sum binom(4k, k) x^k`. The identity holds for `e = 3`.
pub fn functional_equation_mismatch(order: usize, e: u32) -> Option<usize> {
    let f: Vec<BigInt> = (0..=order as u64).map(|k| BigInt::from(binomial(4 * k, k))).collect();
    let mut fm1 = f.clone();
    fm1[0] -= 1;
    let mut g: Vec<BigInt> = f.iter().map(|c| c * 3).collect();
    g[0] += 1;
    let mut lhs = fm1;
    for _ in 0..e {
        lhs = mul_trunc(&lhs, &g, order);
    }
    let f2 = mul_trunc(&f, &f, order);
    let f4 = mul_trunc(&f2, &f2, order);
    let mut rhs = vec![BigInt::zero(); order + 1];
    for i in 0..order {
        rhs[i + 1] = &f4[i] * 256;
    }
    (0..=order).find(|&i| lhs[i] != rhs[i])
}

pub fn verify_functional_equation(order: usize) -> FunctionalEquationReport {
    let first_mismatch = functional_equation_mismatch(order, 3);
    FunctionalEquationReport { order, pass: first_mismatch.is_none(), first_mismatch }
}

/// Highest `k` checked is `k_max`; returns the first `k` where either
/// `B(3k+1, k) = 1/(k C(4k, k))` or `B(3k+1, k+1) = 1/((4k+1) C(4k, k))` fails.
pub fn beta_reduction_failure(k_max: u64) -> Option<u64> {
    (1..=k_max).find(|&k| {
        let c = BigInt::from(binomial(4 * k, k));
        beta_rational(3 * k + 1, k) != Rational::new(BigInt::one(), &c * BigInt::from(k))
            || beta_rational(3 * k + 1, k + 1) != Rational::new(BigInt::one(), c * BigInt::from(4 * k + 1))
    })
}
