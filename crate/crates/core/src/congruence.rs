//! Exact checks of supercongruences and p-adic integrality claims.
//!
//! Every sum is computed in big rationals and the claim reduces to a p-adic
//! valuation, so rational right-hand sides like `21/4 p H_{p-1}` need no
//! special handling. Terms do not depend on `p`, so one [`TermTable`] per
//! claim serves a whole scan through prefix sums.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;

use crate::dsl::{eval_rational, Env, Expr};
use crate::error::{Error, Result};
use crate::exact::{int, is_prime, padic_valuation, Rational, Valuation};
use crate::identity::{Claim, CongruenceClaim, IntegralityClaim, IntegralityMode, PrimeConstraints, SummandSpec};
use crate::parallel::Exec;

/// Exact terms `t_0, t_1, ...` of a summand with running prefix sums.
/// Indices where the summand is undefined are remembered and poison any
/// range that contains them.
pub struct TermTable<'a> {
    summand: &'a SummandSpec,
    /// `harmonic[m][n] = H_n^(m)`.
    harmonic: BTreeMap<u32, Vec<Rational>>,
    /// `prefix[k] = sum_{j < k} t_j`, undefined terms counted as zero.
    prefix: Vec<Rational>,
    undefined: Vec<i64>,
}

impl<'a> TermTable<'a> {
    pub fn new(summand: &'a SummandSpec) -> Self {
        TermTable { summand, harmonic: BTreeMap::new(), prefix: vec![Rational::zero()], undefined: Vec::new() }
    }

    fn harmonic_at(&mut self, n: i64, order: u32) -> Option<Rational> {
        if n < 0 {
            return None;
        }
        let t = self.harmonic.entry(order).or_insert_with(|| vec![Rational::zero()]);
        while t.len() <= n as usize {
            let j = t.len() as i64;
            let next = t.last().unwrap() + Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(j), order as usize));
            t.push(next);
        }
        Some(t[n as usize].clone())
    }

    fn compute(&mut self, k: i64) -> Option<Rational> {
        let s = self.summand;
        let x = int(k);
        let mut v = s.core_exact(k).ok()? * s.numerator.eval(&x);
        if let Some(w) = &s.weight {
            let mut acc = w.constant.eval(&x)?;
            for (h, c) in &w.harmonic {
                acc += c.eval(&x)? * self.harmonic_at(h.arg(k), h.order)?;
            }
            v *= acc;
        }
        Some(v)
    }

    fn extend_to(&mut self, k: i64) {
        while (self.prefix.len() as i64) <= k + 1 {
            let j = self.prefix.len() as i64 - 1;
            let t = match self.compute(j) {
                Some(t) => t,
                None => {
                    self.undefined.push(j);
                    Rational::zero()
                }
            };
            let next = self.prefix.last().unwrap() + t;
            self.prefix.push(next);
        }
    }

    pub fn term(&mut self, k: i64) -> Result<Rational> {
        if k < 0 {
            return Err(Error::InvalidArgument(format!("negative index {k}")));
        }
        self.extend_to(k);
        if self.undefined.contains(&k) {
            return Err(Error::DenominatorRoot { k });
        }
        Ok(&self.prefix[k as usize + 1] - &self.prefix[k as usize])
    }

    /// `sum_{k=lo}^{hi} t_k`; zero when `lo > hi`.
    pub fn range_sum(&mut self, lo: i64, hi: i64) -> Result<Rational> {
        if lo > hi {
            return Ok(Rational::zero());
        }
        if lo < 0 {
            return Err(Error::InvalidArgument(format!("negative index {lo}")));
        }
        self.extend_to(hi);
        if let Some(&k) = self.undefined.iter().find(|&&k| (lo..=hi).contains(&k)) {
            return Err(Error::DenominatorRoot { k });
        }
        Ok(&self.prefix[hi as usize + 1] - &self.prefix[lo as usize])
    }
}

/// Exact sum of the summand over the claim's k-range at `p`.
pub fn sum_range_exact(claim: &CongruenceClaim, p: u64) -> Result<Rational> {
    let (lo, hi) = claim.range.bounds(p);
    TermTable::new(&claim.summand).range_sum(lo, hi)
}

fn admissible(id: &str, c: &PrimeConstraints, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Inadmissible { id: id.to_string(), p, reason: "not prime".into() });
    }
    c.check(p).map_err(|reason| Error::Inadmissible { id: id.to_string(), p, reason })
}

fn env(p: Option<u64>, n: Option<u64>) -> Env {
    let mut e = Env::new();
    if let Some(p) = p {
        e = e.with("p", int(p as i64));
    }
    if let Some(n) = n {
        e = e.with("n", int(n as i64));
    }
    e
}

/// Exact value of a right-hand side at `p`, after the admissibility check.
pub fn eval_rhs_symbolic(claim: &CongruenceClaim, p: u64) -> Result<Rational> {
    admissible(&claim.meta.id, &claim.constraints, p)?;
    eval_rational(&claim.rhs_expr, &env(Some(p), None))
}

fn index(e: &Expr, env: &Env) -> Result<i64> {
    let v = eval_rational(e, env)?;
    if !v.is_integer() {
        return Err(Error::InvalidArgument(format!("summation bound {v} is not an integer")));
    }
    i64::try_from(v.to_integer()).map_err(|_| Error::InvalidArgument(format!("summation bound {v} out of range")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// `v_p` of the checked quantity, `inf` for zero; empty in integer mode.
    pub valuation: String,
    pub required: i64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub resumed: bool,
    pub wall_us: u64,
}

impl CheckResult {
    fn key(&self) -> String {
        match (self.p, self.n) {
            (Some(p), Some(n)) => format!("{p}:{n}"),
            (Some(p), None) => p.to_string(),
            (None, Some(n)) => format!("n{n}"),
            (None, None) => String::new(),
        }
    }

    fn skip(id: &str, p: Option<u64>, n: Option<u64>, required: i64, reason: String) -> CheckResult {
        CheckResult {
            id: id.to_string(),
            p,
            n,
            valuation: String::new(),
            required,
            pass: false,
            skipped: Some(reason),
            resumed: false,
            wall_us: 0,
        }
    }
}

fn show(v: Valuation) -> String {
    match v {
        Valuation::Finite(v) => v.to_string(),
        Valuation::Infinite => "inf".into(),
    }
}

fn check_congruence_with(claim: &CongruenceClaim, p: u64, table: &mut TermTable) -> Result<CheckResult> {
    let t0 = Instant::now();
    let rhs = eval_rhs_symbolic(claim, p)?;
    let (lo, hi) = claim.range.bounds(p);
    let lhs = claim.outer.eval(&int(p as i64)) * table.range_sum(lo, hi)?;
    let v = padic_valuation(&(lhs - rhs), p);
    Ok(CheckResult {
        id: claim.meta.id.clone(),
        p: Some(p),
        n: None,
        valuation: show(v),
        required: claim.modulus as i64,
        pass: v.at_least(claim.modulus as i64),
        skipped: None,
        resumed: false,
        wall_us: t0.elapsed().as_micros() as u64,
    })
}

/// `v_p(outer(p) * sum - rhs(p)) >= modulus`.
pub fn check_congruence(claim: &CongruenceClaim, p: u64) -> Result<CheckResult> {
    check_congruence_with(claim, p, &mut TermTable::new(&claim.summand))
}

fn integrality_value(claim: &IntegralityClaim, p: Option<u64>, n: u64, table: &mut TermTable) -> Result<Rational> {
    let e = env(p, Some(n));
    let mut acc = Rational::zero();
    for part in &claim.parts {
        let [c, lo, hi] = &part.exprs;
        let c = eval_rational(c, &e)?;
        if !c.is_zero() {
            acc += c * table.range_sum(index(lo, &e)?, index(hi, &e)?)?;
        }
    }
    let d = eval_rational(&claim.divisor_expr, &e)?;
    if d.is_zero() {
        return Err(Error::InvalidArgument(format!("divisor of `{}` vanishes at n = {n}", claim.meta.id)));
    }
    Ok(acc / d)
}

fn check_padic_with(claim: &IntegralityClaim, p: u64, n: u64, table: &mut TermTable) -> Result<CheckResult> {
    let t0 = Instant::now();
    admissible(&claim.meta.id, &claim.constraints, p)?;
    let v = padic_valuation(&integrality_value(claim, Some(p), n, table)?, p);
    Ok(CheckResult {
        id: claim.meta.id.clone(),
        p: Some(p),
        n: Some(n),
        valuation: show(v),
        required: 0,
        pass: v.at_least(0),
        skipped: None,
        resumed: false,
        wall_us: t0.elapsed().as_micros() as u64,
    })
}

/// `v_p(value) >= 0` for a p-adic integrality claim.
pub fn check_padic_integrality(claim: &IntegralityClaim, p: u64, n: u64) -> Result<CheckResult> {
    check_padic_with(claim, p, n, &mut TermTable::new(&claim.summand))
}

fn check_divisibility_with(claim: &IntegralityClaim, n: u64, table: &mut TermTable) -> Result<CheckResult> {
    let t0 = Instant::now();
    let v = integrality_value(claim, None, n, table)?;
    Ok(CheckResult {
        id: claim.meta.id.clone(),
        p: None,
        n: Some(n),
        valuation: String::new(),
        required: 0,
        pass: v.is_integer(),
        skipped: None,
        resumed: false,
        wall_us: t0.elapsed().as_micros() as u64,
    })
}

/// The quotient of an integer-mode claim is an integer.
pub fn check_integer_divisibility(claim: &IntegralityClaim, n: u64) -> Result<CheckResult> {
    check_divisibility_with(claim, n, &mut TermTable::new(&claim.summand))
}

/// Runs a congruence over every prime in the list; inadmissible primes are
/// reported as skipped and failures never stop the scan.
pub fn congruence_scan(claim: &CongruenceClaim, primes: &[u64]) -> Vec<CheckResult> {
    let mut table = TermTable::new(&claim.summand);
    primes
        .iter()
        .map(|&p| {
            check_congruence_with(claim, p, &mut table).unwrap_or_else(|e| {
                CheckResult::skip(&claim.meta.id, Some(p), None, claim.modulus as i64, e.to_string())
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ScanPlan {
    pub primes: Vec<u64>,
    /// `n` values for p-adic integrality claims.
    pub padic_n: Vec<u64>,
    /// `n` values for integer-divisibility claims.
    pub integer_n: Vec<u64>,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan { primes: crate::exact::primes_in(5, 31), padic_n: vec![1, 2, 3], integer_n: (1..=200).collect() }
    }
}

/// Completed `(claim, key)` records, one tab-separated line each:
/// `id  key  pass  valuation`.
pub struct Checkpoint {
    done: HashMap<(String, String), (bool, String)>,
    sink: Option<Mutex<File>>,
}

impl Checkpoint {
    pub fn none() -> Self {
        Checkpoint { done: HashMap::new(), sink: None }
    }

    /// Reads an existing file and appends new records to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut done = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                let f: Vec<&str> = line.split('\t').collect();
                if let [id, key, pass, val] = f[..] {
                    done.insert((id.to_string(), key.to_string()), (pass == "pass", val.to_string()));
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Checkpoint { done, sink: Some(Mutex::new(file)) })
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    fn lookup(&self, id: &str, key: &str) -> Option<&(bool, String)> {
        self.done.get(&(id.to_string(), key.to_string()))
    }

    fn record(&self, r: &CheckResult) {
        if r.skipped.is_some() || r.resumed {
            return;
        }
        if let Some(sink) = &self.sink {
            let verdict = if r.pass { "pass" } else { "fail" };
            let mut f = sink.lock().unwrap();
            // a lost line only means the check is redone on resume
            let _ = writeln!(f, "{}\t{}\t{}\t{}", r.id, r.key(), verdict, r.valuation);
            let _ = f.flush();
        }
    }
}

fn jobs(claim: &Claim, plan: &ScanPlan) -> Vec<(Option<u64>, Option<u64>)> {
    match claim {
        Claim::Congruence(_) => plan.primes.iter().map(|&p| (Some(p), None)).collect(),
        Claim::Integrality(c) if c.mode == IntegralityMode::Padic => {
            plan.primes.iter().flat_map(|&p| plan.padic_n.iter().map(move |&n| (Some(p), Some(n)))).collect()
        }
        Claim::Integrality(_) => plan.integer_n.iter().map(|&n| (None, Some(n))).collect(),
        _ => Vec::new(),
    }
}

fn run_claim(claim: &Claim, plan: &ScanPlan, ckpt: &Checkpoint) -> Vec<CheckResult> {
    let (summand, required) = match claim {
        Claim::Congruence(c) => (&c.summand, c.modulus as i64),
        Claim::Integrality(c) => (&c.summand, 0),
        _ => return Vec::new(),
    };
    let mut table = TermTable::new(summand);
    let id = claim.id();
    jobs(claim, plan)
        .into_iter()
        .map(|(p, n)| {
            let probe = CheckResult::skip(id, p, n, required, String::new());
            if let Some((pass, val)) = ckpt.lookup(id, &probe.key()) {
                return CheckResult { valuation: val.clone(), pass: *pass, skipped: None, resumed: true, ..probe };
            }
            let r = match (claim, p, n) {
                (Claim::Congruence(c), Some(p), _) => check_congruence_with(c, p, &mut table),
                (Claim::Integrality(c), Some(p), Some(n)) => check_padic_with(c, p, n, &mut table),
                (Claim::Integrality(c), None, Some(n)) => check_divisibility_with(c, n, &mut table),
                _ => unreachable!("jobs() only yields matching shapes"),
            };
            let r = r.unwrap_or_else(|e| CheckResult::skip(id, p, n, required, e.to_string()));
            ckpt.record(&r);
            r
        })
        .collect()
}

/// Scans every congruence and integrality claim in order. Claims run in
/// parallel under `Exec::Parallel`; results keep claim order.
pub fn scan(claims: &[&Claim], plan: &ScanPlan, ckpt: &Checkpoint, exec: Exec) -> Vec<CheckResult> {
    exec.map(claims, |c| run_claim(c, plan, ckpt)).into_iter().flatten().collect()
}

/// Fraction of executed checks that passed, for summaries.
pub fn tally(results: &[CheckResult]) -> (usize, usize, usize) {
    let skipped = results.iter().filter(|r| r.skipped.is_some()).count();
    let passed = results.iter().filter(|r| r.pass).count();
    (passed, results.len() - skipped - passed, skipped)
}
