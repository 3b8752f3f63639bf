//! Integer-relation detection (PSLQ) and closed-form rediscovery.
//!
//! The iteration works in fixed point on big integers, following the layout
//! of the classic Ferguson-Bailey formulation (1-based indices kept in the
//! comments). A relation is only reported after it is re-checked in ball
//! arithmetic against the inputs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::ball::{bits_for_digits, log10_abs, Ball};
use crate::closed_form::{ClosedForm, Constant, ConstantMonomial};
use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::identity::SeriesIdentity;
use crate::series::evaluate_series;

/// A product of constants with exponents; the empty list is `1`.
pub type Monomial = Vec<(Constant, i32)>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationResult {
    #[serde(serialize_with = "ser_ints")]
    pub coefficients: Vec<BigInt>,
    /// Upper bound on `|sum c_i v_i|` in ball arithmetic.
    pub residual: String,
    /// How far below the input scale the residual sits, in digits.
    pub confidence_digits: u32,
    pub labels: Vec<String>,
}

fn ser_ints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

#[derive(Clone, Debug, PartialEq)]
pub enum PslqOutcome {
    Found(RelationResult),
    /// Every relation has Euclidean norm at least this bound.
    None { norm_bound: f64, steps: usize },
}

impl PslqOutcome {
    pub fn relation(&self) -> Option<&RelationResult> {
        match self {
            PslqOutcome::Found(r) => Some(r),
            PslqOutcome::None { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PslqParams {
    /// Largest absolute coefficient accepted.
    pub max_coeff: BigInt,
    pub max_steps: usize,
}

impl Default for PslqParams {
    fn default() -> Self {
        PslqParams { max_coeff: BigInt::from(1_000_000), max_steps: 20_000 }
    }
}

fn to_fixed(b: &Ball, prec: u32) -> BigInt {
    let (m, p) = (b.mid_raw(), b.prec());
    if p >= prec {
        m >> ((p - prec) as usize)
    } else {
        m << ((prec - p) as usize)
    }
}

fn sqrt_fixed(x: &BigInt, prec: u32) -> BigInt {
    if x.is_negative() {
        return BigInt::zero();
    }
    (x << prec as usize).sqrt()
}

fn round_fixed(x: &BigInt, prec: u32) -> BigInt {
    ((x + (BigInt::one() << (prec as usize - 1))) >> prec as usize) << prec as usize
}

/// Floor division, as Python's `//`.
fn fdiv(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::div_floor(a, b)
}

/// Searches for integers `c` with `sum c_i v_i = 0` and `|c_i| < max_coeff`.
///
/// `digits` is the working precision; the inputs must be known to within
/// `10^-(digits - 10)` relative to their size or the call is refused.
pub fn pslq(values: &[Ball], labels: &[String], digits: u32, params: &PslqParams) -> Result<PslqOutcome> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument("PSLQ needs at least two values".into()));
    }
    if digits < 16 {
        return Err(Error::InsufficientPrecision(format!("{digits} digits is too few for PSLQ")));
    }
    let scale = values.iter().map(|v| v.mid().abs()).max().unwrap_or_else(Rational::zero).max(Rational::one());
    let limit = Rational::new(BigInt::one(), BigInt::from(10).pow(digits.saturating_sub(10))) * &scale;
    if let Some(v) = values.iter().find(|v| v.rad() > limit) {
        return Err(Error::InsufficientPrecision(format!(
            "input radius {} exceeds {} at {digits} digits",
            crate::ball::decimal(&v.rad(), 3),
            crate::ball::decimal(&limit, 3)
        )));
    }

    let base = bits_for_digits(digits) - 32;
    let target = base * 3 / 4;
    let prec = base + 60;
    let p = prec as usize;
    let one = BigInt::one() << p;
    let tol = BigInt::one() << (prec - target) as usize;

    // x[1..=n], stored 0-based
    let x: Vec<BigInt> = values.iter().map(|v| to_fixed(v, prec)).collect();
    let minx = x.iter().map(|v| v.abs()).min().unwrap();
    if minx.is_zero() {
        return Err(Error::InvalidArgument("PSLQ needs nonzero values".into()));
    }
    if minx < fdiv(&tol, &BigInt::from(100)) {
        return Ok(PslqOutcome::None { norm_bound: 0.0, steps: 0 });
    }
    let g = sqrt_fixed(&fdiv(&(BigInt::from(4) << p), &BigInt::from(3)), prec);

    let mut a = vec![vec![BigInt::zero(); n]; n];
    let mut b = vec![vec![BigInt::zero(); n]; n];
    let mut h = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        a[i][i] = one.clone();
        b[i][i] = one.clone();
    }
    let mut s = vec![BigInt::zero(); n];
    for k in 0..n {
        let t: BigInt = (k..n).map(|j| (&x[j] * &x[j]) >> p).sum();
        s[k] = sqrt_fixed(&t, prec);
    }
    let t = s[0].clone();
    let mut y: Vec<BigInt> = x.iter().map(|v| fdiv(&(v << p), &t)).collect();
    for sk in s.iter_mut() {
        *sk = fdiv(&(&*sk << p), &t);
    }
    for i in 0..n {
        if i + 1 < n {
            h[i][i] = if s[i].is_zero() { BigInt::zero() } else { fdiv(&(&s[i + 1] << p), &s[i]) };
        }
        for j in 0..i {
            let sjj1 = &s[j] * &s[j + 1];
            h[i][j] = if sjj1.is_zero() { BigInt::zero() } else { fdiv(&((-&y[i] * &y[j]) << p), &sjj1) };
        }
    }

    // reduce row i against rows j, as in the main loop's step 4
    let reduce = |i: usize, jmax: usize, y: &mut Vec<BigInt>, h: &mut Vec<Vec<BigInt>>, a: &mut Vec<Vec<BigInt>>, b: &mut Vec<Vec<BigInt>>| -> bool {
        for j in (0..jmax).rev() {
            if h[j][j].is_zero() {
                return false;
            }
            let t = round_fixed(&fdiv(&(&h[i][j] << p), &h[j][j]), prec);
            if t.is_zero() {
                continue;
            }
            let dy = (&t * &y[i]) >> p;
            y[j] += dy;
            for k in 0..=j {
                let d = (&t * &h[j][k]) >> p;
                h[i][k] -= d;
            }
            for k in 0..n {
                let d = (&t * &a[j][k]) >> p;
                a[i][k] -= d;
                let d = (&t * &b[k][i]) >> p;
                b[k][j] += d;
            }
        }
        true
    };
    for i in 1..n {
        reduce(i, i, &mut y, &mut h, &mut a, &mut b);
    }

    let max_fixed = &params.max_coeff << p;
    let mut norm_bound = 0.0;
    for step in 0..params.max_steps {
        // choose m maximising g^i |H[i][i]|
        let mut m = 0usize;
        let mut best = BigInt::from(-1);
        let mut gi = g.clone();
        for i in 0..n - 1 {
            let sz = (&gi * h[i][i].abs()) >> (p * i);
            if sz > best {
                best = sz;
                m = i;
            }
            gi = &gi * &g;
        }
        y.swap(m, m + 1);
        h.swap(m, m + 1);
        a.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = sqrt_fixed(&((&h[m][m] * &h[m][m] + &h[m][m + 1] * &h[m][m + 1]) >> p), prec);
            if t0.is_zero() {
                break;
            }
            let t1 = fdiv(&(&h[m][m] << p), &t0);
            let t2 = fdiv(&(&h[m][m + 1] << p), &t0);
            for row in h.iter_mut().skip(m) {
                let (t3, t4) = (row[m].clone(), row[m + 1].clone());
                row[m] = (&t1 * &t3 + &t2 * &t4) >> p;
                row[m + 1] = (-&t2 * &t3 + &t1 * &t4) >> p;
            }
        }
        let mut exhausted = false;
        for i in m + 1..n {
            if !reduce(i, (i).min(m + 2), &mut y, &mut h, &mut a, &mut b) {
                exhausted = true;
                break;
            }
        }

        for i in 0..n {
            if y[i].abs() < tol {
                let vec: Vec<BigInt> = (0..n).map(|j| round_fixed(&b[j][i], prec) >> p).collect();
                if vec.iter().all(|v| (v.abs() << p) < max_fixed) && vec.iter().any(|v| !v.is_zero()) {
                    if let Some(r) = confirm(values, labels, &vec, target) {
                        return Ok(PslqOutcome::Found(r));
                    }
                }
            }
        }
        let recnorm = h.iter().flatten().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero);
        if !recnorm.is_zero() {
            let nb = fdiv(&(BigInt::one() << (2 * p)), &recnorm) >> p;
            norm_bound = nb.to_f64().unwrap_or(f64::MAX) / 100.0;
            if nb / 100 >= params.max_coeff {
                return Ok(PslqOutcome::None { norm_bound, steps: step + 1 });
            }
        }
        if exhausted {
            return Ok(PslqOutcome::None { norm_bound, steps: step + 1 });
        }
    }
    Ok(PslqOutcome::None { norm_bound, steps: params.max_steps })
}

/// Re-checks a candidate in ball arithmetic: the combination must vanish to
/// within the detection threshold plus the propagated input radii.
fn confirm(values: &[Ball], labels: &[String], c: &[BigInt], target_bits: u32) -> Option<RelationResult> {
    let w = values.iter().map(|v| v.prec()).max().unwrap_or(64);
    let mut acc = Ball::zero(w);
    for (v, ci) in values.iter().zip(c) {
        acc = acc.add(&v.with_prec(w).mul_int(ci));
    }
    let mass: BigInt = c.iter().map(|v| v.abs()).sum::<BigInt>() + 1;
    let scale = values.iter().map(|v| v.mid().abs()).max().unwrap_or_else(Rational::zero).max(Rational::one());
    let threshold = Rational::new(mass, BigInt::one() << target_bits as usize) * &scale;
    let residual = acc.abs_upper();
    if residual > threshold {
        return None;
    }
    let confidence = if residual.is_zero() { w as f64 * 0.30103 } else { -log10_abs(&(&residual / &scale)) };
    let mut coefficients = c.to_vec();
    // first nonzero coefficient positive
    if coefficients.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
        coefficients.iter_mut().for_each(|v| *v = -&*v);
    }
    Some(RelationResult {
        coefficients,
        residual: crate::ball::decimal(&residual, 3),
        confidence_digits: confidence.max(0.0).floor() as u32,
        labels: labels.to_vec(),
    })
}

fn monomial_label(m: &Monomial) -> String {
    if m.is_empty() {
        return "1".into();
    }
    ClosedForm::from_terms(vec![ConstantMonomial { coefficient: Rational::one(), factors: m.clone() }]).to_string()
}

/// The monomials of a closed form after expanding logs over primes, with `1` first.
pub fn basis_of(cf: &ClosedForm) -> Vec<Monomial> {
    canonical_basis(&cf.terms().iter().map(|t| t.factors.clone()).collect::<Vec<_>>())
}

/// Expands `log q` over prime logs so the basis is independent; always starts with `1`.
pub fn canonical_basis(basis: &[Monomial]) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = vec![Vec::new()];
    for m in basis {
        let cf = ClosedForm::from_terms(vec![ConstantMonomial { coefficient: Rational::one(), factors: m.clone() }]);
        for t in cf.expand_logs().terms() {
            if !out.contains(&t.factors) {
                out.push(t.factors.clone());
            }
        }
    }
    out
}

/// Presentation form: the plain log terms over several primes are folded
/// into one `c log(q)` with the coefficient positive and `q` reduced.
pub fn fold_logs(cf: &ClosedForm) -> ClosedForm {
    let mut logs: BTreeMap<u64, Rational> = BTreeMap::new();
    let mut rest = Vec::new();
    for t in cf.expand_logs().terms() {
        match t.factors.as_slice() {
            [(Constant::Log(p), 1)] if p.is_integer() => {
                let p = p.to_integer().to_u64().unwrap_or(0);
                *logs.entry(p).or_insert_with(Rational::zero) += &t.coefficient;
            }
            _ => rest.push(t.clone()),
        }
    }
    if logs.len() < 2 {
        return cf.expand_logs();
    }
    let num_gcd = logs.values().fold(BigInt::zero(), |g, c| num_integer::Integer::gcd(&g, c.numer()));
    let den_lcm = logs.values().fold(BigInt::one(), |l, c| num_integer::Integer::lcm(&l, c.denom()));
    let g = Rational::new(num_gcd, den_lcm);
    let mut q = Rational::one();
    for (p, c) in &logs {
        let e = (c / &g).to_integer().to_i64().unwrap_or(0);
        q *= crate::exact::rat_pow(&int(*p as i64), e);
    }
    rest.push(ConstantMonomial { coefficient: g, factors: vec![(Constant::Log(q), 1)] });
    ClosedForm::from_terms(rest)
}

#[derive(Clone, Debug)]
pub struct DiscoverOptions {
    /// Largest multiplier allowed on the series value; clears denominators.
    pub max_multiplier: u64,
    pub max_coeff: BigInt,
}

impl Default for DiscoverOptions {
    fn default() -> Self {
        DiscoverOptions { max_multiplier: 96, max_coeff: BigInt::from(1_000_000) }
    }
}

/// A closed-form candidate. Always evidence only; never written back to a corpus.
#[derive(Clone, Debug, Serialize)]
pub struct Discovery {
    pub id: String,
    pub digits: u32,
    pub label: &'static str,
    #[serde(skip)]
    pub candidate: ClosedForm,
    /// The candidate with logs folded for reading.
    pub display: String,
    pub claimed: String,
    pub matches_claimed: bool,
    pub relation: RelationResult,
}

/// Evaluates the series and looks for `value = sum r_i b_i` over the basis.
pub fn discover_rhs(s: &SeriesIdentity, basis: &[Monomial], digits: u32, opts: &DiscoverOptions) -> Result<Option<Discovery>> {
    let basis = canonical_basis(basis);
    let work = digits + 10;
    let prec = bits_for_digits(work);
    let value = evaluate_series(s, work)?.value;
    let mut values = vec![value];
    let mut labels = vec![format!("sum[{}]", s.meta.id)];
    for m in &basis {
        let cf = ClosedForm::from_terms(vec![ConstantMonomial { coefficient: Rational::one(), factors: m.clone() }]);
        values.push(cf.eval(prec)?);
        labels.push(monomial_label(m));
    }
    let params = PslqParams { max_coeff: opts.max_coeff.clone(), ..PslqParams::default() };
    let rel = match pslq(&values, &labels, digits, &params)? {
        PslqOutcome::Found(r) => r,
        PslqOutcome::None { .. } => return Ok(None),
    };
    let c0 = rel.coefficients[0].clone();
    if c0.is_zero() || c0.abs() > BigInt::from(opts.max_multiplier) {
        return Ok(None);
    }
    let terms = basis
        .iter()
        .zip(&rel.coefficients[1..])
        .map(|(m, c)| ConstantMonomial { coefficient: Rational::new(-c, c0.clone()), factors: m.clone() })
        .collect();
    let candidate = ClosedForm::from_terms(terms);
    Ok(Some(Discovery {
        id: s.meta.id.clone(),
        digits,
        label: "EVIDENCE-ONLY",
        display: fold_logs(&candidate).to_string(),
        claimed: s.rhs.to_string(),
        matches_claimed: candidate.expand_logs() == s.rhs.expand_logs(),
        candidate,
        relation: rel,
    }))
}
