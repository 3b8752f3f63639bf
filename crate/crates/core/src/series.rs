//! Rigorous numerical evaluation of hypergeometric-type series.
//!
//! A summand is split into components `core(k) * f_j(k) * H_j(k)` where
//! `core` is the binomial/base/denominator part, `f_j` a rational function
//! and `H_j` a harmonic number (or 1). The core is advanced by its exact
//! step ratio, so every term costs a handful of multiplications by small
//! rationals. Tails are bounded component-wise by a geometric envelope.

use std::time::Instant;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::ball::{bits_for_digits, log10_abs, rational_to_f64, Ball};
use crate::error::{Error, Result};
use crate::exact::{int, rat, HarmonicSpec, Rational};
use crate::identity::{Claim, Corpus, Filter, SeriesIdentity, Status};
use crate::parallel::Exec;
use crate::poly::{largest_real_root_below, QPoly, QRatFunc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TailMode {
    Rigorous,
    Heuristic,
}

/// A bound on `|sum_{k >= cutoff} t_k|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCertificate {
    pub mode: TailMode,
    pub cutoff: i64,
    /// Largest per-step ratio used by the envelope; always below one.
    pub ratio_bound: Rational,
    pub bound: Rational,
    /// Extra multiplier applied in HEURISTIC mode.
    pub slack: Option<Rational>,
    pub justification: String,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Refuse harmonic summands instead of labelling them HEURISTIC.
    pub rigorous_only: bool,
    /// Sum exactly the terms below this index and skip the adaptive loop.
    pub cutoff: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    /// Partial sum widened by the tail bound.
    pub value: Ball,
    pub partial: Ball,
    pub tail: TailCertificate,
    pub terms: usize,
}

const HEURISTIC_SLACK: i64 = 2;

struct Component {
    factor: QRatFunc,
    harmonic: Option<HarmonicSpec>,
    /// `t_{k+1}/t_k` of `core * factor`.
    ratio: QRatFunc,
}

fn x(k: i64) -> Rational {
    int(k)
}

fn shift_one(f: &QRatFunc) -> QRatFunc {
    f.compose_poly(&QPoly::linear(Rational::one(), Rational::one()))
}

fn root_free_from(p: &QPoly) -> i64 {
    if p.degree().unwrap_or(0) == 0 {
        i64::MIN
    } else {
        largest_real_root_below(p)
    }
}

fn components(s: &SeriesIdentity) -> Vec<Component> {
    let core = s.summand.core_ratio();
    let num = QRatFunc::from_poly(s.summand.numerator.clone());
    let mut parts: Vec<(QRatFunc, Option<HarmonicSpec>)> = Vec::new();
    match &s.summand.weight {
        None => parts.push((num, None)),
        Some(w) => {
            parts.push((num.mul(&w.constant), None));
            for (h, c) in &w.harmonic {
                parts.push((num.mul(c), Some(*h)));
            }
        }
    }
    parts
        .into_iter()
        .filter(|(f, _)| !f.is_zero())
        .map(|(factor, harmonic)| {
            let ratio = core.mul(&shift_one(&factor)).div(&factor);
            Component { factor, harmonic, ratio }
        })
        .collect()
}

/// Beyond this index the ratio of the component is continuous, monotone and
/// of constant sign, and the factor has no zeros.
fn monotone_from(c: &Component) -> i64 {
    let (a, b) = (c.ratio.num(), c.ratio.den());
    let crit = a.derivative().mul(b).sub(&a.mul(&b.derivative()));
    [a, b, &crit, c.factor.num(), c.factor.den()].into_iter().map(root_free_from).max().unwrap_or(i64::MIN)
}

/// `sup_{k >= n} |rho(k)|` once `n` lies past every critical point.
fn ratio_sup(c: &Component, n: i64, limit: &Rational) -> Rational {
    let at = c.ratio.eval(&x(n)).map(|v| v.abs()).unwrap_or_else(|| Rational::from_integer(1_000_000.into()));
    at.max(limit.abs())
}

struct Walker {
    k: i64,
    prec: u32,
    core: Ball,
    core_ratio: QRatFunc,
    harmonics: Vec<Option<(HarmonicSpec, Ball)>>,
    partial: Ball,
}

impl Walker {
    fn new(s: &SeriesIdentity, comps: &[Component], prec: u32) -> Result<Walker> {
        let k = s.start;
        let core = Ball::from_rational(&s.summand.core_exact(k)?, prec);
        let harmonics = comps
            .iter()
            .map(|c| c.harmonic.map(|h| (h, Ball::from_rational(&h.eval(k), prec))))
            .collect();
        Ok(Walker { k, prec, core, core_ratio: s.summand.core_ratio(), harmonics, partial: Ball::zero(prec) })
    }

    /// Component values `core(k) * f_j(k)` before the harmonic factor.
    fn pieces(&self, comps: &[Component]) -> Result<Vec<Ball>> {
        comps
            .iter()
            .map(|c| {
                let f = c.factor.eval(&x(self.k)).ok_or(Error::DenominatorRoot { k: self.k })?;
                Ok(self.core.mul_rat(&f))
            })
            .collect()
    }

    fn term(&self, comps: &[Component]) -> Result<Ball> {
        let mut t = Ball::zero(self.prec);
        for (piece, h) in self.pieces(comps)?.iter().zip(&self.harmonics) {
            t = t.add(&match h {
                Some((_, hb)) => piece.mul(hb),
                None => piece.clone(),
            });
        }
        Ok(t)
    }

    fn step(&mut self, comps: &[Component]) -> Result<()> {
        let t = self.term(comps)?;
        self.partial = self.partial.add(&t);
        let r = self.core_ratio.eval(&x(self.k)).ok_or(Error::DenominatorRoot { k: self.k })?;
        self.core = self.core.mul_rat(&r);
        for (spec, hb) in self.harmonics.iter_mut().flatten() {
            let (from, to) = (spec.arg(self.k), spec.arg(self.k + 1));
            for n in from + 1..=to {
                let inv = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(n), spec.order as usize));
                *hb = hb.add(&Ball::from_rational(&inv, self.prec));
            }
        }
        self.k += 1;
        Ok(())
    }

    fn advance_to(&mut self, n: i64, comps: &[Component]) -> Result<()> {
        while self.k < n {
            self.step(comps)?;
        }
        Ok(())
    }
}

struct TailPlan {
    comps: Vec<Component>,
    limit: Rational,
    monotone: i64,
}

impl TailPlan {
    fn new(s: &SeriesIdentity) -> TailPlan {
        let comps = components(s);
        let monotone = comps.iter().map(monotone_from).max().unwrap_or(i64::MIN);
        TailPlan { comps, limit: s.summand.term_ratio_limit(), monotone }
    }

    /// Tail bound at the walker's current index, or `None` if some envelope
    /// ratio is not yet below one.
    fn bound(&self, w: &Walker) -> Result<Option<TailCertificate>> {
        let n = w.k;
        if n < self.monotone {
            return Ok(None);
        }
        let one = Rational::one();
        let pieces = w.pieces(&self.comps)?;
        let mut total = Rational::zero();
        let mut q_max = Rational::zero();
        let mut heuristic = false;
        for ((c, piece), h) in self.comps.iter().zip(&pieces).zip(&w.harmonics) {
            let mut q = ratio_sup(c, n, &self.limit);
            let a = piece.abs_upper();
            let size = match (c.harmonic, h) {
                (None, _) => a,
                (Some(spec), Some((_, hb))) => {
                    heuristic = true;
                    if spec.order == 1 {
                        // H_{a+s}/H_a <= 1 + s/(a+1) once a >= 1
                        let arg = spec.arg(n);
                        if arg < 1 {
                            return Ok(None);
                        }
                        q *= &one + rat(spec.slope as i64, arg + 1);
                        a * hb.abs_upper()
                    } else {
                        // H^{(m)} < zeta(m) <= m/(m-1)
                        a * rat(spec.order as i64, spec.order as i64 - 1)
                    }
                }
                (Some(_), None) => unreachable!("harmonic state tracks every component"),
            };
            if q >= one {
                return Ok(None);
            }
            total += size / (&one - &q);
            q_max = q_max.max(q);
        }
        let (mode, slack, justification) = if heuristic {
            total *= int(HEURISTIC_SLACK);
            (
                TailMode::Heuristic,
                Some(int(HEURISTIC_SLACK)),
                format!(
                    "geometric envelope with harmonic growth folded into the ratio past k = {}, times slack {}",
                    self.monotone.max(0),
                    HEURISTIC_SLACK
                ),
            )
        } else {
            (
                TailMode::Rigorous,
                None,
                format!(
                    "term ratio is monotone with no poles for k >= {}; sup |rho| on [N, inf) is max(|rho(N)|, |r|)",
                    self.monotone.max(0)
                ),
            )
        };
        Ok(Some(TailCertificate { mode, cutoff: n, ratio_bound: q_max, bound: total, slack, justification }))
    }
}

fn planned_cutoff(digits: u32, limit: &Rational) -> i64 {
    let r = rational_to_f64(&limit.abs());
    let n = if r <= 0.0 { digits as f64 } else { digits as f64 * std::f64::consts::LN_10 / -r.ln() };
    n.ceil() as i64 + 50
}

fn bit_len(n: i64) -> u32 {
    64 - (n.max(1) as u64).leading_zeros()
}

/// Target half-width `10^-(D+1) * max(1, |v|)`.
fn target(digits: u32, magnitude: &Rational) -> Rational {
    let m = magnitude.abs().max(Rational::one());
    m / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(10), digits as usize + 1))
}

pub fn evaluate_series(s: &SeriesIdentity, digits: u32) -> Result<Evaluation> {
    evaluate_series_with(s, digits, &EvalOptions::default())
}

pub fn evaluate_series_with(s: &SeriesIdentity, digits: u32, opts: &EvalOptions) -> Result<Evaluation> {
    let fail = |reason: String| Error::TailBound { id: s.meta.id.clone(), reason };
    let plan = TailPlan::new(s);
    if plan.limit.abs() >= Rational::one() {
        return Err(fail(format!("converging rate {} is not below one in magnitude", plan.limit)));
    }
    if opts.rigorous_only && s.summand.has_harmonics() {
        return Err(fail("harmonic weights only admit a HEURISTIC tail".into()));
    }
    let mut n = match opts.cutoff {
        Some(c) => c.max(s.start),
        None => planned_cutoff(digits, &plan.limit).max(plan.monotone).max(s.start + 1),
    };
    let mut guard = 16;
    let max_n = 50 * planned_cutoff(digits, &plan.limit) + 10_000;
    loop {
        let prec = bits_for_digits(digits) + 2 * bit_len(n) + guard;
        let mut w = Walker::new(s, &plan.comps, prec)?;
        loop {
            w.advance_to(n, &plan.comps)?;
            let tail = plan.bound(&w)?;
            let tol = target(digits, &w.partial.mid());
            match tail {
                Some(t) if opts.cutoff.is_some() || t.bound <= tol => {
                    if opts.cutoff.is_none() && w.partial.rad() > tol {
                        // rounding dominated: redo with more bits
                        let excess = log10_abs(&(w.partial.rad() / &tol)) * std::f64::consts::LOG2_10;
                        guard += excess.ceil().max(8.0) as u32 + 8;
                        break;
                    }
                    let value = w.partial.add_error(&t.bound);
                    let terms = (w.k - s.start) as usize;
                    return Ok(Evaluation { value, partial: w.partial, tail: t, terms });
                }
                Some(_) | None if opts.cutoff.is_some() => {
                    return Err(fail(format!("no envelope ratio below one at N = {n}")));
                }
                _ => {
                    n += n / 4 + 10;
                    if n > max_n {
                        return Err(fail(format!("no certified tail up to N = {max_n}")));
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Badge {
    /// Numeric reproduction of a proven statement.
    Verified,
    /// Numerical evidence for an open conjecture.
    Evidence,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallSummary {
    pub mid: String,
    pub radius: String,
}

impl BallSummary {
    pub fn new(b: &Ball, digits: u32) -> BallSummary {
        let r = b.rad();
        let radius = if r.is_zero() { "0".to_string() } else { format!("1e{}", log10_abs(&r).ceil() as i64) };
        BallSummary { mid: b.to_decimal(digits as usize + 5), radius }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailSummary {
    pub mode: TailMode,
    pub cutoff: i64,
    pub ratio_bound: String,
    pub bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<String>,
    pub justification: String,
}

impl From<&TailCertificate> for TailSummary {
    fn from(t: &TailCertificate) -> Self {
        let b = if t.bound.is_zero() { "0".to_string() } else { format!("1e{}", log10_abs(&t.bound).ceil() as i64) };
        TailSummary {
            mode: t.mode,
            cutoff: t.cutoff,
            ratio_bound: format!("{:.6}", rational_to_f64(&t.ratio_bound)),
            bound: b,
            slack: t.slack.as_ref().map(|s| s.to_string()),
            justification: t.justification.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    pub status: Status,
    pub badge: Badge,
    pub digits: u32,
    pub agreement: u32,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<BallSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<BallSummary>,
    pub claimed: String,
    pub terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_ms: u64,
}

/// Digits of agreement between two balls relative to `max(1, |rhs|)`.
pub fn agreement_digits(lhs: &Ball, rhs: &Ball, cap: u32) -> u32 {
    let scale = rhs.mid().abs().max(Rational::one());
    let err = (lhs.mid() - rhs.mid()).abs().max(lhs.rad() + rhs.rad());
    if err.is_zero() {
        return cap;
    }
    let d = -log10_abs(&(err / scale));
    if d <= 0.0 {
        0
    } else {
        (d.floor() as u32).min(cap)
    }
}

/// The pass rule: `|dmid| <= rad_l + rad_r + 10^-(D-3) * max(1, |rhs|)`.
pub fn balls_agree(lhs: &Ball, rhs: &Ball, digits: u32) -> bool {
    let scale = rhs.mid().abs().max(Rational::one());
    let slack = scale / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(10), digits.saturating_sub(3) as usize));
    (lhs.mid() - rhs.mid()).abs() <= lhs.rad() + rhs.rad() + slack
}

fn badge(status: Status, pass: bool) -> Badge {
    match (pass, status.is_proven()) {
        (false, _) => Badge::Failed,
        (true, true) => Badge::Verified,
        (true, false) => Badge::Evidence,
    }
}

pub fn verify_identity(s: &SeriesIdentity, digits: u32) -> Result<VerificationReport> {
    verify_identity_with(s, digits, &EvalOptions::default())
}

pub fn verify_identity_with(s: &SeriesIdentity, digits: u32, opts: &EvalOptions) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let ev = evaluate_series_with(s, digits, opts)?;
    let rhs = s.rhs.eval(ev.value.prec())?;
    let pass = balls_agree(&ev.value, &rhs, digits);
    Ok(VerificationReport {
        id: s.meta.id.clone(),
        status: s.meta.status,
        badge: badge(s.meta.status, pass),
        digits,
        agreement: agreement_digits(&ev.value, &rhs, digits + 5),
        pass,
        lhs: Some(BallSummary::new(&ev.value, digits)),
        rhs: Some(BallSummary::new(&rhs, digits)),
        claimed: s.rhs.to_string(),
        terms: ev.terms,
        tail: Some((&ev.tail).into()),
        error: None,
        wall_ms: t0.elapsed().as_millis() as u64,
    })
}

fn failed_report(s: &SeriesIdentity, digits: u32, e: Error) -> VerificationReport {
    VerificationReport {
        id: s.meta.id.clone(),
        status: s.meta.status,
        badge: Badge::Failed,
        digits,
        agreement: 0,
        pass: false,
        lhs: None,
        rhs: None,
        claimed: s.rhs.to_string(),
        terms: 0,
        tail: None,
        error: Some(e.to_string()),
        wall_ms: 0,
    }
}

/// Verifies every series identity selected by `filter`, ordered by id.
/// `digits` maps each identity to its working precision.
pub fn batch_verify(
    corpus: &Corpus,
    filter: &Filter,
    digits: impl Fn(&SeriesIdentity) -> u32 + Sync + Send,
    opts: &EvalOptions,
    exec: Exec,
) -> Vec<VerificationReport> {
    let mut items: Vec<&SeriesIdentity> =
        corpus.claims().iter().filter(|c| filter.matches(c)).filter_map(Claim::as_series).collect();
    items.sort_by(|a, b| a.meta.id.cmp(&b.meta.id));
    exec.map(&items, |s| {
        let d = digits(s);
        verify_identity_with(s, d, opts).unwrap_or_else(|e| failed_report(s, d, e))
    })
}
