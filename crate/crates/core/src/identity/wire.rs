//! JSON forms of claims. Authoring documents may write polynomials, weights
//! and binomial products as DSL strings; serialization always produces the
//! structured canonical form, which parses back to an equal claim.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::*;
use crate::dsl::{self, eval_rational, to_harmonic_linear, to_poly, Env};
use crate::exact::{format_rational, parse_rational};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolyWire {
    Text(String),
    Coeffs(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct RatFuncWire {
    num: Vec<String>,
    den: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct HarmonicTermWire {
    order: u32,
    slope: u32,
    offset: i64,
    coefficient: RatFuncWire,
}

#[derive(Serialize, Deserialize)]
struct WeightCanon {
    constant: RatFuncWire,
    harmonic: Vec<HarmonicTermWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightWire {
    Text(String),
    Canon(WeightCanon),
}

#[derive(Serialize, Deserialize)]
struct BinomialWire {
    top: [i64; 2],
    bottom: [i64; 2],
    exponent: i32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BinomialsWire {
    Text(String),
    List(Vec<BinomialWire>),
}

#[derive(Serialize, Deserialize)]
struct SummandWire {
    #[serde(default)]
    binomials: Option<BinomialsWire>,
    #[serde(default)]
    base: Option<String>,
    #[serde(default)]
    base_exponent: Option<String>,
    #[serde(default)]
    numerator: Option<PolyWire>,
    #[serde(default)]
    denominator: Vec<PolyWire>,
    #[serde(default)]
    weight: Option<WeightWire>,
}

#[derive(Deserialize)]
struct SeriesWire {
    #[serde(flatten)]
    meta: Meta,
    start: i64,
    summand: SummandWire,
    rhs: String,
    #[serde(default)]
    rate: Option<String>,
}

#[derive(Deserialize)]
struct CongruenceWire {
    #[serde(flatten)]
    meta: Meta,
    summand: SummandWire,
    range: String,
    #[serde(default)]
    outer: Option<PolyWire>,
    rhs: String,
    modulus: u32,
    #[serde(default)]
    constraints: PrimeConstraints,
}

#[derive(Serialize, Deserialize)]
struct PartWire {
    #[serde(default = "super::one_str")]
    coefficient: String,
    lower: String,
    upper: String,
}

#[derive(Deserialize)]
struct IntegralityWire {
    #[serde(flatten)]
    meta: Meta,
    mode: IntegralityMode,
    summand: SummandWire,
    parts: Vec<PartWire>,
    divisor: String,
    #[serde(default)]
    constraints: PrimeConstraints,
}

type Fail = std::result::Result<(), String>;

fn sem(id: &str, message: impl Into<String>) -> Error {
    Error::Semantic { id: id.to_string(), message: message.into() }
}

fn rats(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn poly_from(w: &PolyWire, var: &str) -> Result<QPoly> {
    match w {
        PolyWire::Text(s) => to_poly(&dsl::parse(s)?, var),
        PolyWire::Coeffs(c) => Ok(QPoly::new(rats(c)?)),
    }
}

fn poly_to_wire(p: &QPoly) -> Vec<String> {
    p.coeffs().iter().map(format_rational).collect()
}

fn ratfunc_from(w: &RatFuncWire) -> Result<QRatFunc> {
    let den = QPoly::new(rats(&w.den)?);
    if den.is_zero() {
        return Err(Error::Syntax { line: 1, column: 1, message: "zero denominator".into() });
    }
    Ok(QRatFunc::new(QPoly::new(rats(&w.num)?), den))
}

fn ratfunc_to_wire(f: &QRatFunc) -> RatFuncWire {
    RatFuncWire { num: poly_to_wire(f.num()), den: poly_to_wire(f.den()) }
}

fn affine(e: &Expr) -> Result<(i64, i64)> {
    let p = to_poly(e, "k")?;
    let bad = || Error::Syntax { line: 1, column: 1, message: format!("binomial argument `{e}` is not integer affine in k") };
    if p.degree().unwrap_or(0) > 1 || p.coeffs().iter().any(|c| !c.is_integer()) {
        return Err(bad());
    }
    Ok((small_int(&p.coeff(1)).ok_or_else(bad)?, small_int(&p.coeff(0)).ok_or_else(bad)?))
}

fn collect_binomials(e: &Expr, sign: i32, out: &mut Vec<BinomialFactor>) -> Result<()> {
    let bad = |m: String| Error::Syntax { line: 1, column: 1, message: m };
    match e {
        Expr::Num(n) if n == &num_bigint::BigInt::from(1) => Ok(()),
        Expr::Mul(a, b) => {
            collect_binomials(a, sign, out)?;
            collect_binomials(b, sign, out)
        }
        Expr::Div(a, b) => {
            collect_binomials(a, sign, out)?;
            collect_binomials(b, -sign, out)
        }
        Expr::Pow(a, k) => {
            let mut inner = Vec::new();
            collect_binomials(a, sign, &mut inner)?;
            for mut f in inner {
                f.exponent *= *k as i32;
                out.push(f);
            }
            Ok(())
        }
        Expr::Call(name, args) if name == "binom" && args.len() == 2 => {
            out.push(BinomialFactor { top: affine(&args[0])?, bottom: affine(&args[1])?, exponent: sign });
            Ok(())
        }
        other => Err(bad(format!("`{other}` is not a product of binomials"))),
    }
}

fn summand_from(w: &SummandWire) -> Result<SummandSpec> {
    let mut binomials = Vec::new();
    match &w.binomials {
        None => {}
        Some(BinomialsWire::Text(s)) if s.trim().is_empty() => {}
        Some(BinomialsWire::Text(s)) => collect_binomials(&dsl::parse(s)?, 1, &mut binomials)?,
        Some(BinomialsWire::List(l)) => {
            binomials = l
                .iter()
                .map(|b| BinomialFactor { top: (b.top[0], b.top[1]), bottom: (b.bottom[0], b.bottom[1]), exponent: b.exponent })
                .collect()
        }
    }
    // merge repeated factors so the canonical form is unique
    let mut merged: Vec<BinomialFactor> = Vec::new();
    for b in binomials {
        match merged.iter_mut().find(|m| m.top == b.top && m.bottom == b.bottom) {
            Some(m) => m.exponent += b.exponent,
            None => merged.push(b),
        }
    }
    merged.retain(|b| b.exponent != 0);
    let base = match &w.base {
        None => Rational::one(),
        Some(s) => eval_rational(&dsl::parse(s)?, &Env::new())?,
    };
    let base_shift = match w.base_exponent.as_deref().map(|s| s.replace(' ', "")) {
        None => 0,
        Some(s) if s == "k" => 0,
        Some(s) if s == "k-1" => 1,
        Some(s) => return Err(Error::Syntax { line: 1, column: 1, message: format!("base exponent `{s}` must be `k` or `k-1`") }),
    };
    let numerator = match &w.numerator {
        None => QPoly::one(),
        Some(p) => poly_from(p, "k")?,
    };
    let denominator = w.denominator.iter().map(|p| poly_from(p, "k")).collect::<Result<Vec<_>>>()?;
    let weight = match &w.weight {
        None => None,
        Some(WeightWire::Text(s)) => {
            let h = to_harmonic_linear(&dsl::parse(s)?, "k")?;
            Some(Weight { constant: h.constant, harmonic: h.terms.into_iter().collect() })
        }
        Some(WeightWire::Canon(c)) => {
            let mut harmonic = Vec::new();
            for t in &c.harmonic {
                harmonic.push((HarmonicSpec { order: t.order, slope: t.slope, offset: t.offset }, ratfunc_from(&t.coefficient)?));
            }
            harmonic.sort_by(|a, b| a.0.cmp(&b.0));
            Some(Weight { constant: ratfunc_from(&c.constant)?, harmonic })
        }
    };
    Ok(SummandSpec { binomials: merged, base, base_shift, numerator, denominator, weight })
}

fn summand_to_value(s: &SummandSpec) -> Value {
    let mut m = Map::new();
    let bl: Vec<BinomialWire> = s
        .binomials
        .iter()
        .map(|b| BinomialWire { top: [b.top.0, b.top.1], bottom: [b.bottom.0, b.bottom.1], exponent: b.exponent })
        .collect();
    m.insert("binomials".into(), serde_json::to_value(BinomialsWire::List(bl)).expect("binomials"));
    m.insert("base".into(), Value::String(format_rational(&s.base)));
    m.insert("base_exponent".into(), Value::String(if s.base_shift == 1 { "k-1" } else { "k" }.into()));
    m.insert("numerator".into(), json!(poly_to_wire(&s.numerator)));
    m.insert("denominator".into(), json!(s.denominator.iter().map(poly_to_wire).collect::<Vec<_>>()));
    if let Some(w) = &s.weight {
        let canon = WeightCanon {
            constant: ratfunc_to_wire(&w.constant),
            harmonic: w
                .harmonic
                .iter()
                .map(|(h, c)| HarmonicTermWire { order: h.order, slope: h.slope, offset: h.offset, coefficient: ratfunc_to_wire(c) })
                .collect(),
        };
        m.insert("weight".into(), serde_json::to_value(WeightWire::Canon(canon)).expect("weight"));
    }
    Value::Object(m)
}

fn check_vars(id: &str, what: &str, e: &Expr, env: &Env) -> Result<()> {
    match eval_rational(e, env) {
        Ok(_) => Ok(()),
        Err(Error::Semantic { message, .. }) if message.contains("unbound") => Err(sem(id, format!("{what}: {message}"))),
        Err(Error::Unknown { kind, name }) => Err(sem(id, format!("{what}: unknown {kind} `{name}`"))),
        Err(_) => Ok(()),
    }
}

fn first_admissible(c: &PrimeConstraints) -> u64 {
    (c.min_prime.max(5)..).find(|&p| crate::exact::is_prime(p) && !c.excluded.contains(&p)).expect("a prime")
}

fn wrap<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Semantic { id: i, message } if i.is_empty() => sem(id, message),
        Error::Semantic { .. } => e,
        other => sem(id, other.to_string()),
    })
}

fn lift(id: &str, r: Fail) -> Result<()> {
    r.map_err(|m| sem(id, m))
}

fn series_from(w: SeriesWire) -> Result<Claim> {
    let id = w.meta.id.clone();
    let summand = wrap(&id, summand_from(&w.summand))?;
    lift(&id, summand.validate(w.start))?;
    let rhs: ClosedForm = wrap(&id, w.rhs.parse())?;
    let rate = summand.term_ratio_limit();
    if let Some(stated) = &w.rate {
        let stated = wrap(&id, eval_rational(&wrap(&id, dsl::parse(stated))?, &Env::new()))?;
        if stated != rate {
            return Err(sem(&id, format!("stated rate {stated} differs from computed rate {rate}")));
        }
    }
    if abs_rat(&rate) >= Rational::one() {
        return Err(sem(&id, format!("term ratio limit {rate} does not give geometric convergence")));
    }
    Ok(Claim::Series(SeriesIdentity { meta: w.meta, start: w.start, summand, rhs, rate }))
}

fn congruence_from(w: CongruenceWire) -> Result<Claim> {
    let id = w.meta.id.clone();
    let summand = wrap(&id, summand_from(&w.summand))?;
    let range = wrap(&id, RangeKind::parse(&w.range))?;
    lift(&id, summand.validate(range.min_start()))?;
    let outer = match &w.outer {
        None => QPoly::one(),
        Some(p) => wrap(&id, poly_from(p, "p"))?,
    };
    let rhs_expr = wrap(&id, dsl::parse(&w.rhs))?;
    let p = first_admissible(&w.constraints);
    check_vars(&id, "rhs", &rhs_expr, &Env::new().with("p", Rational::from_integer(p.into())))?;
    if w.modulus == 0 {
        return Err(sem(&id, "modulus exponent must be positive"));
    }
    Ok(Claim::Congruence(CongruenceClaim {
        meta: w.meta,
        summand,
        range,
        outer,
        rhs: w.rhs,
        rhs_expr,
        modulus: w.modulus,
        constraints: w.constraints,
    }))
}

fn integrality_from(w: IntegralityWire) -> Result<Claim> {
    let id = w.meta.id.clone();
    let summand = wrap(&id, summand_from(&w.summand))?;
    let p = first_admissible(&w.constraints);
    let env = Env::new().with("p", Rational::from_integer(p.into())).with("n", Rational::one());
    let mut parts = Vec::new();
    let mut min_lower = i64::MAX;
    for part in w.parts {
        let exprs = [
            wrap(&id, dsl::parse(&part.coefficient))?,
            wrap(&id, dsl::parse(&part.lower))?,
            wrap(&id, dsl::parse(&part.upper))?,
        ];
        for (what, e) in ["coefficient", "lower", "upper"].iter().zip(&exprs) {
            check_vars(&id, what, e, &env)?;
        }
        if let Ok(l) = eval_rational(&exprs[1], &env) {
            min_lower = min_lower.min(small_int(&l).unwrap_or(0));
        }
        parts.push(SumPart { coefficient: part.coefficient, lower: part.lower, upper: part.upper, exprs });
    }
    if parts.is_empty() {
        return Err(sem(&id, "integrality claim needs at least one sum"));
    }
    lift(&id, summand.validate(min_lower.min(0).max(0)))?;
    let divisor_expr = wrap(&id, dsl::parse(&w.divisor))?;
    check_vars(&id, "divisor", &divisor_expr, &env)?;
    Ok(Claim::Integrality(IntegralityClaim {
        meta: w.meta,
        mode: w.mode,
        summand,
        parts,
        divisor: w.divisor,
        divisor_expr,
        constraints: w.constraints,
    }))
}

fn certificate_from(c: CertificateSpec) -> Result<Claim> {
    let id = c.meta.id.clone();
    let mut texts = vec![c.integrand.as_str(), c.antiderivative.rational.as_str(), c.scale.as_str()];
    texts.extend(c.partial_fractions.as_deref());
    for l in &c.antiderivative.logs {
        texts.extend([l.coefficient.as_str(), l.argument.as_str()]);
    }
    for a in &c.antiderivative.arctans {
        texts.extend([a.coefficient.as_str(), a.argument.as_str()]);
    }
    if let Some(m) = &c.moment {
        texts.extend([m.polynomial.as_str(), m.c.as_str(), m.prefactor.as_str()]);
        texts.extend(m.claimed.as_deref());
    }
    for t in texts {
        wrap(&id, dsl::parse(t))?;
    }
    wrap(&id, c.endpoint.parse::<ClosedForm>())?;
    if c.sqrt == 0 {
        return Err(sem(&id, "sqrt field must be a positive square-free integer"));
    }
    Ok(Claim::Certificate(c))
}

/// Parses one claim document (authoring or canonical form).
pub fn parse_identity(document: &str) -> Result<Claim> {
    let v: Value = serde_json::from_str(document)?;
    claim_from_value(v)
}

pub(crate) fn claim_from_value(v: Value) -> Result<Claim> {
    let id = v.get("id").and_then(Value::as_str).unwrap_or("<unnamed>").to_string();
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| sem(&id, "missing `kind`"))?;
    let kind = ClaimKind::parse(kind)?;
    let de = |e: serde_json::Error| sem(&id, e.to_string());
    match kind {
        ClaimKind::Series => series_from(serde_json::from_value(v).map_err(de)?),
        ClaimKind::Congruence => congruence_from(serde_json::from_value(v).map_err(de)?),
        ClaimKind::Integrality => integrality_from(serde_json::from_value(v).map_err(de)?),
        ClaimKind::Certificate => certificate_from(serde_json::from_value(v).map_err(de)?),
    }
}

/// Canonical JSON value of a claim.
pub fn serialize_claim(c: &Claim) -> Value {
    let mut m = match serde_json::to_value(c.meta()).expect("meta") {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    m.insert("kind".into(), serde_json::to_value(c.kind()).expect("kind"));
    match c {
        Claim::Series(s) => {
            m.insert("start".into(), json!(s.start));
            m.insert("summand".into(), summand_to_value(&s.summand));
            m.insert("rhs".into(), Value::String(s.rhs.to_string()));
            m.insert("rate".into(), Value::String(format_rational(&s.rate)));
        }
        Claim::Congruence(g) => {
            m.insert("summand".into(), summand_to_value(&g.summand));
            m.insert("range".into(), Value::String(g.range.as_str().into()));
            m.insert("outer".into(), json!(poly_to_wire(&g.outer)));
            m.insert("rhs".into(), Value::String(g.rhs.clone()));
            m.insert("modulus".into(), json!(g.modulus));
            m.insert("constraints".into(), serde_json::to_value(&g.constraints).expect("constraints"));
        }
        Claim::Integrality(g) => {
            m.insert("mode".into(), serde_json::to_value(g.mode).expect("mode"));
            m.insert("summand".into(), summand_to_value(&g.summand));
            let parts: Vec<PartWire> = g
                .parts
                .iter()
                .map(|p| PartWire { coefficient: p.coefficient.clone(), lower: p.lower.clone(), upper: p.upper.clone() })
                .collect();
            m.insert("parts".into(), serde_json::to_value(parts).expect("parts"));
            m.insert("divisor".into(), Value::String(g.divisor.clone()));
            m.insert("constraints".into(), serde_json::to_value(&g.constraints).expect("constraints"));
        }
        Claim::Certificate(cert) => {
            if let Value::Object(extra) = serde_json::to_value(cert).expect("certificate") {
                for (k, v) in extra {
                    m.entry(k).or_insert(v);
                }
            }
        }
    }
    Value::Object(m)
}
