//! Claim model: series identities, congruences, integrality claims and
//! antiderivative certificates, with their JSON form and the bundled corpus.

mod corpus;
mod wire;

pub use corpus::{corpus_filter, corpus_load, corpus_load_from, manifest, Corpus, Filter, ManifestEntry, CORPUS_ENV};
pub use wire::{parse_identity, serialize_claim};

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::exact::{binomial, rat_pow, HarmonicSpec, Rational};
use crate::poly::{largest_real_root_below, QPoly, QRatFunc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Theorem,
    Lemma,
    Cited,
    Conjecture,
    LemmaGradeConjecture,
}

impl Status {
    pub fn is_proven(&self) -> bool {
        matches!(self, Status::Theorem | Status::Lemma | Status::Cited)
    }

    pub fn parse(s: &str) -> Result<Status> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Unknown { kind: "status", name: s.to_string() })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    Series,
    Congruence,
    Integrality,
    Certificate,
}

impl ClaimKind {
    pub fn parse(s: &str) -> Result<ClaimKind> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Unknown { kind: "claim kind", name: s.to_string() })
    }
}

/// Bookkeeping shared by every claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub id: String,
    pub status: Status,
    pub section: String,
    pub anchor: String,
    pub quote: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// `binom(a*k + a0, b*k + b0)^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialFactor {
    pub top: (i64, i64),
    pub bottom: (i64, i64),
    pub exponent: i32,
}

impl BinomialFactor {
    fn args(&self, k: i64) -> (i64, i64) {
        (self.top.0 * k + self.top.1, self.bottom.0 * k + self.bottom.1)
    }

    pub fn eval(&self, k: i64) -> BigInt {
        let (n, r) = self.args(k);
        binomial(n as u64, r as u64)
    }

    /// `binom(top(k+1), bottom(k+1)) / binom(top(k), bottom(k))` as a rational function of `k`.
    pub fn step_ratio(&self) -> QRatFunc {
        let (a, a0) = self.top;
        let (b, b0) = self.bottom;
        let lin = |s: i64, o: i64| QPoly::linear(Rational::from_integer(s.into()), Rational::from_integer(o.into()));
        let mut num = QPoly::one();
        let mut den = QPoly::one();
        // C(A+a, B+b)/C(A, B) = prod (A+i) / (prod (B+j) * prod (A-B+l))
        for i in 1..=a {
            num = num.mul(&lin(a, a0 + i));
        }
        for j in 1..=b {
            den = den.mul(&lin(b, b0 + j));
        }
        for l in 1..=(a - b) {
            den = den.mul(&lin(a - b, a0 - b0 + l));
        }
        QRatFunc::new(num, den).pow(self.exponent)
    }

    /// Limit of the step ratio, `a^a / (b^b (a-b)^(a-b))` raised to the exponent.
    pub fn rate(&self) -> Rational {
        let (a, b) = (self.top.0, self.bottom.0);
        let p = |x: i64| rat_pow(&Rational::from_integer(x.into()), x);
        rat_pow(&(p(a) / (p(b) * p(a - b))), self.exponent as i64)
    }

    fn validate(&self, start: i64) -> std::result::Result<(), String> {
        let (a, b) = (self.top.0, self.bottom.0);
        if a <= 0 || b < 0 || b > a {
            return Err(format!("binomial slopes ({a}, {b}) must satisfy 0 <= b <= a, a > 0"));
        }
        let (n, r) = self.args(start);
        if n < 0 || r < 0 {
            return Err(format!("binomial argument negative at k = {start}"));
        }
        if r > n {
            return Err(format!("binomial vanishes at k = {start}"));
        }
        Ok(())
    }
}

impl fmt::Display for BinomialFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let aff = |(s, o): (i64, i64)| match (s, o) {
            (0, o) => format!("{o}"),
            (1, 0) => "k".to_string(),
            (s, 0) => format!("{s}k"),
            (1, o) => format!("k{o:+}"),
            (s, o) => format!("{s}k{o:+}"),
        };
        write!(f, "binom({}, {})", aff(self.top), aff(self.bottom))?;
        if self.exponent != 1 {
            write!(f, "^{}", self.exponent)?;
        }
        Ok(())
    }
}

/// A summand weight `constant(k) + sum coefficient_i(k) * H_i(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    pub constant: QRatFunc,
    pub harmonic: Vec<(HarmonicSpec, QRatFunc)>,
}

impl Weight {
    pub fn eval(&self, k: i64) -> Result<Rational> {
        let x = Rational::from_integer(k.into());
        let mut acc = self.constant.eval(&x).ok_or(Error::DenominatorRoot { k })?;
        for (h, c) in &self.harmonic {
            acc += c.eval(&x).ok_or(Error::DenominatorRoot { k })? * h.eval(k);
        }
        Ok(acc)
    }

    pub fn is_harmonic(&self) -> bool {
        !self.harmonic.is_empty()
    }

    pub fn rational_parts(&self) -> impl Iterator<Item = &QRatFunc> {
        std::iter::once(&self.constant).chain(self.harmonic.iter().map(|(_, c)| c))
    }
}

/// `prod binom^e * base^(k - shift) * numerator(k) / prod denominator_i(k) * weight(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummandSpec {
    pub binomials: Vec<BinomialFactor>,
    pub base: Rational,
    /// 0 for `base^k`, 1 for `base^(k-1)`.
    pub base_shift: i64,
    pub numerator: QPoly,
    pub denominator: Vec<QPoly>,
    pub weight: Option<Weight>,
}

fn int_root_at_or_after(p: &QPoly, start: i64) -> Option<i64> {
    if p.degree().unwrap_or(0) == 0 {
        return None;
    }
    let hi = largest_real_root_below(p);
    (start..hi.max(start)).find(|&k| p.eval(&Rational::from_integer(k.into())).is_zero())
}

impl SummandSpec {
    pub fn has_harmonics(&self) -> bool {
        self.weight.as_ref().is_some_and(Weight::is_harmonic)
    }

    pub fn harmonic_specs(&self) -> Vec<HarmonicSpec> {
        self.weight.as_ref().map(|w| w.harmonic.iter().map(|(h, _)| *h).collect()).unwrap_or_default()
    }

    pub fn denominator_product(&self) -> QPoly {
        self.denominator.iter().fold(QPoly::one(), |acc, d| acc.mul(d))
    }

    /// `numerator(k) / prod denominator_i(k)` as one rational function.
    pub fn rational_part(&self) -> QRatFunc {
        QRatFunc::new(self.numerator.clone(), self.denominator_product())
    }

    /// The hypergeometric core without the numerator polynomial and weight:
    /// `prod binom^e * base^(k - shift) / prod denominator_i(k)`.
    pub fn core_exact(&self, k: i64) -> Result<Rational> {
        let x = Rational::from_integer(k.into());
        let mut v = rat_pow(&self.base, k - self.base_shift);
        for b in &self.binomials {
            v *= rat_pow(&Rational::from_integer(b.eval(k)), b.exponent as i64);
        }
        for d in &self.denominator {
            let dv = d.eval(&x);
            if dv.is_zero() {
                return Err(Error::DenominatorRoot { k });
            }
            v /= dv;
        }
        Ok(v)
    }

    /// `core(k+1) / core(k)` as a rational function of `k`.
    pub fn core_ratio(&self) -> QRatFunc {
        let mut r = QRatFunc::constant(self.base.clone());
        for b in &self.binomials {
            r = r.mul(&b.step_ratio());
        }
        let d = self.denominator_product();
        r.mul(&QRatFunc::new(d.clone(), d.shift(&Rational::one())))
    }

    /// `(numerator * weight)(k)` for weights without harmonic numbers.
    pub fn plain_factor(&self) -> Option<QRatFunc> {
        let base = QRatFunc::from_poly(self.numerator.clone());
        match &self.weight {
            None => Some(base),
            Some(w) if !w.is_harmonic() => Some(base.mul(&w.constant)),
            _ => None,
        }
    }

    /// Exact term value.
    pub fn eval_exact(&self, k: i64) -> Result<Rational> {
        let mut v = self.core_exact(k)? * self.numerator.eval(&Rational::from_integer(k.into()));
        if let Some(w) = &self.weight {
            v *= w.eval(k)?;
        }
        Ok(v)
    }

    /// Term value with harmonic factors stripped, used for ratio sanity checks.
    pub fn hypergeometric_exact(&self, k: i64) -> Result<Rational> {
        Ok(self.core_exact(k)? * self.numerator.eval(&Rational::from_integer(k.into())))
    }

    /// Signed limit of consecutive term ratios.
    pub fn term_ratio_limit(&self) -> Rational {
        self.binomials.iter().fold(self.base.clone(), |acc, b| acc * b.rate())
    }

    /// Checks every structural invariant for indices `k >= start`.
    pub fn validate(&self, start: i64) -> std::result::Result<(), String> {
        if self.base.is_zero() {
            return Err("base must be nonzero".into());
        }
        for b in &self.binomials {
            b.validate(start)?;
        }
        for d in &self.denominator {
            if d.is_zero() {
                return Err("zero denominator factor".into());
            }
            if let Some(k) = int_root_at_or_after(d, start) {
                return Err(format!("denominator factor {d} vanishes at k = {k}"));
            }
        }
        if let Some(w) = &self.weight {
            for c in w.rational_parts() {
                if let Some(k) = int_root_at_or_after(c.den(), start) {
                    return Err(format!("weight denominator {} vanishes at k = {k}", c.den()));
                }
            }
            for (h, _) in &w.harmonic {
                if h.order == 0 {
                    return Err("harmonic order must be positive".into());
                }
                if !h.valid_from(start) {
                    return Err(format!("harmonic argument {}k{:+} negative at k = {start}", h.slope, h.offset));
                }
            }
        }
        Ok(())
    }
}

/// `sum_{k >= start} summand(k) = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesIdentity {
    pub meta: Meta,
    pub start: i64,
    pub summand: SummandSpec,
    pub rhs: ClosedForm,
    pub rate: Rational,
}

/// The k-ranges used by congruence claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RangeKind {
    OneToPMinus1,
    ZeroToPMinus1,
    ZeroToHalf,
    OneToHalf,
    ZeroToHalfMinus1,
    UpperHalf,
}

impl RangeKind {
    pub const ALL: [RangeKind; 6] = [
        RangeKind::OneToPMinus1,
        RangeKind::ZeroToPMinus1,
        RangeKind::ZeroToHalf,
        RangeKind::OneToHalf,
        RangeKind::ZeroToHalfMinus1,
        RangeKind::UpperHalf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RangeKind::OneToPMinus1 => "1..p-1",
            RangeKind::ZeroToPMinus1 => "0..p-1",
            RangeKind::ZeroToHalf => "0..(p-1)/2",
            RangeKind::OneToHalf => "1..(p-1)/2",
            RangeKind::ZeroToHalfMinus1 => "0..(p-3)/2",
            RangeKind::UpperHalf => "(p-1)/2<k<p",
        }
    }

    pub fn parse(s: &str) -> Result<RangeKind> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        RangeKind::ALL
            .into_iter()
            .find(|r| r.as_str() == t || (t == "p/2<k<p" && *r == RangeKind::UpperHalf))
            .ok_or_else(|| Error::Unknown { kind: "range", name: s.to_string() })
    }

    /// Inclusive bounds for an odd prime `p`; empty when `lo > hi`.
    pub fn bounds(&self, p: u64) -> (i64, i64) {
        let p = p as i64;
        match self {
            RangeKind::OneToPMinus1 => (1, p - 1),
            RangeKind::ZeroToPMinus1 => (0, p - 1),
            RangeKind::ZeroToHalf => (0, (p - 1) / 2),
            RangeKind::OneToHalf => (1, (p - 1) / 2),
            RangeKind::ZeroToHalfMinus1 => (0, (p - 3) / 2),
            RangeKind::UpperHalf => ((p + 1) / 2, p - 1),
        }
    }

    /// Smallest index the range can reach.
    pub fn min_start(&self) -> i64 {
        match self {
            RangeKind::OneToPMinus1 | RangeKind::OneToHalf => 1,
            RangeKind::UpperHalf => 2,
            _ => 0,
        }
    }
}

/// Which primes a claim speaks about.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrimeConstraints {
    #[serde(default = "default_min_prime")]
    pub min_prime: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<u64>,
}

fn default_min_prime() -> u64 {
    2
}

impl PrimeConstraints {
    pub fn check(&self, p: u64) -> std::result::Result<(), String> {
        if !crate::exact::is_prime(p) {
            return Err(format!("{p} is not prime"));
        }
        if p < self.min_prime {
            return Err(format!("claim requires p >= {}", self.min_prime));
        }
        if self.excluded.contains(&p) {
            return Err(format!("claim excludes p = {p}"));
        }
        Ok(())
    }
}

/// `v_p(outer(p) * sum_{k in range} summand(k) - rhs(p)) >= modulus`.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceClaim {
    pub meta: Meta,
    pub summand: SummandSpec,
    pub range: RangeKind,
    pub outer: QPoly,
    pub rhs: String,
    pub rhs_expr: Expr,
    pub modulus: u32,
    pub constraints: PrimeConstraints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralityMode {
    /// `v_p(value) >= 0`.
    Padic,
    /// The value is an integer.
    Integer,
}

/// `coefficient(p, n) * sum_{lower(p,n) <= k <= upper(p,n)} summand(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SumPart {
    pub coefficient: String,
    pub lower: String,
    pub upper: String,
    pub exprs: [Expr; 3],
}

/// `(sum of parts) / divisor(p, n)` is p-integral (or an integer).
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralityClaim {
    pub meta: Meta,
    pub mode: IntegralityMode,
    pub summand: SummandSpec,
    pub parts: Vec<SumPart>,
    pub divisor: String,
    pub divisor_expr: Expr,
    pub constraints: PrimeConstraints,
}

/// `coefficient * log(argument)`; the argument has rational coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogTerm {
    pub coefficient: String,
    pub argument: String,
}

/// `coefficient * atan(argument)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArctanTerm {
    pub coefficient: String,
    pub argument: String,
}

/// An elementary antiderivative over `Q(sqrt(d))`, all parts DSL strings in `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Antiderivative {
    #[serde(default = "zero_str")]
    pub rational: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub logs: Vec<LogTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arctans: Vec<ArctanTerm>,
}

fn zero_str() -> String {
    "0".into()
}

/// The geometric-moment stage: `sum_{k >= start} P(k) z^(k - start)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub polynomial: String,
    #[serde(default)]
    pub start: i64,
    /// Claimed closed form in `z`, if the source states one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed: Option<String>,
    /// `z = c * x^power * (1 - x)`.
    pub c: String,
    pub power: u32,
    /// Extra factor in `x` multiplying the series.
    #[serde(default = "one_str")]
    pub prefactor: String,
}

fn one_str() -> String {
    "1".into()
}

/// Data for an antiderivative certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSpec {
    #[serde(flatten)]
    pub meta: Meta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentSpec>,
    /// Claimed integrand in `x`.
    pub integrand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_fractions: Option<String>,
    pub antiderivative: Antiderivative,
    /// `integrand = scale * F'`.
    #[serde(default = "one_str")]
    pub scale: String,
    /// Square-free `d` for coefficients in `Q(sqrt(d))`; 1 when rational.
    #[serde(default = "one_u64")]
    pub sqrt: u64,
    /// Claimed value of the integral over `[0, 1]`.
    pub endpoint: String,
}

fn one_u64() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq)]
pub enum Claim {
    Series(SeriesIdentity),
    Congruence(CongruenceClaim),
    Integrality(IntegralityClaim),
    Certificate(CertificateSpec),
}

impl Claim {
    pub fn meta(&self) -> &Meta {
        match self {
            Claim::Series(s) => &s.meta,
            Claim::Congruence(c) => &c.meta,
            Claim::Integrality(c) => &c.meta,
            Claim::Certificate(c) => &c.meta,
        }
    }

    pub fn id(&self) -> &str {
        &self.meta().id
    }

    pub fn kind(&self) -> ClaimKind {
        match self {
            Claim::Series(_) => ClaimKind::Series,
            Claim::Congruence(_) => ClaimKind::Congruence,
            Claim::Integrality(_) => ClaimKind::Integrality,
            Claim::Certificate(_) => ClaimKind::Certificate,
        }
    }

    pub fn as_series(&self) -> Option<&SeriesIdentity> {
        match self {
            Claim::Series(s) => Some(s),
            _ => None,
        }
    }
}

impl SeriesIdentity {
    /// Exact term; indices below the start are rejected.
    pub fn term(&self, k: i64) -> Result<Rational> {
        if k < self.start {
            return Err(Error::BelowStart { k, start: self.start });
        }
        self.summand.eval_exact(k)
    }

    /// Exact partial sum over `start <= k < end`.
    pub fn partial_sum_exact(&self, end: i64) -> Result<Rational> {
        let mut acc = Rational::zero();
        for k in self.start..end {
            acc += self.term(k)?;
        }
        Ok(acc)
    }
}

/// Signed limit of `t_{k+1}/t_k`.
pub fn term_ratio_limit(s: &SummandSpec) -> Rational {
    s.term_ratio_limit()
}

/// Exact term of a summand at `k >= start`.
pub fn summand_eval_exact(s: &SummandSpec, start: i64, k: i64) -> Result<Rational> {
    if k < start {
        return Err(Error::BelowStart { k, start });
    }
    s.eval_exact(k)
}

pub(crate) fn small_int(q: &Rational) -> Option<i64> {
    if q.is_integer() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

pub(crate) fn abs_rat(q: &Rational) -> Rational {
    q.abs()
}
