use std::collections::BTreeMap;
use std::io::Write;

use regex::Regex;
use serde_json::json;

use serieslab_core::certificate::{check_certificate, verify_functional_equation};
use serieslab_core::closed_form::{ClosedForm, Constant};
use serieslab_core::congruence::{scan, Checkpoint, ScanPlan};
use serieslab_core::error::{Error, Result};
use serieslab_core::exact::{format_rational, parse_rational, primes_in, Rational};
use serieslab_core::identity::{corpus_load, manifest, Claim, ClaimKind, Corpus, Filter, Status};
use serieslab_core::parallel::{with_threads, Exec};
use serieslab_core::pslq::{discover_rhs, DiscoverOptions, Monomial};
use serieslab_core::series::{batch_verify, EvalOptions};
use serieslab_core::telescope::{
    standard_m_values, verify_induction_step, verify_instances, verify_shift_identity, FamilyTag, TelescopeFamily,
};

use crate::report::Report;
use crate::{Cli, Command, CorpusAction, Selection};

/// Runs the command and prints its report; `Ok(false)` means some check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let threads = cli.parallel.map(|n| n as usize).unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    let exec = if threads > 1 { Exec::Parallel } else { Exec::Sequential };
    let corpus = corpus_load()?;
    let report = with_threads(threads, || dispatch(cli, &corpus, exec))?;

    let doc = report.to_json(!cli.no_timing);
    let pretty = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    if let Some(path) = &cli.report {
        std::fs::write(path, format!("{pretty}\n"))?;
    }
    let text = if cli.json { format!("{pretty}\n") } else { report.to_text() };
    let mut stdout = std::io::stdout().lock();
    // a closed pipe (e.g. `| head`) is not a failure of the checks
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(report.ok())
}

fn dispatch(cli: &Cli, corpus: &Corpus, exec: Exec) -> Result<Report> {
    match &cli.command {
        Command::Verify(a) => verify(corpus, &a.select, a.digits, a.allow_heuristic, exec),
        Command::Telescope(a) => telescope(a.all, &a.families, &a.ms, a.n, exec),
        Command::Congruence(a) => congruence(corpus, a, exec),
        Command::Certificates(a) => certificates(corpus, a.all, &a.ids, a.order, exec),
        Command::Discover(a) => discover(corpus, &a.select, a.basis.as_deref(), a.digits, exec),
        Command::Corpus { action } => corpus_cmd(corpus, action),
    }
}

fn kind_name(k: ClaimKind) -> String {
    serde_json::to_value(k).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Applies `--filter` and `--id` on top of a fixed set of kinds. Filters with
/// the same key are alternatives; different keys must all hold.
fn select<'a>(corpus: &'a Corpus, sel: &Selection, kinds: &[ClaimKind]) -> Result<Vec<&'a Claim>> {
    let mut base = Filter { kinds: kinds.to_vec(), ..Filter::default() };
    let mut sections = Vec::new();
    let mut globs = Vec::new();
    let mut kind_filter = Vec::new();
    for f in &sel.filters {
        let (key, value) =
            f.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("filter `{f}` is not KEY=VALUE")))?;
        match key.trim() {
            "status" => base.statuses.push(Status::parse(value.trim())?),
            "kind" => kind_filter.push(ClaimKind::parse(value.trim())?),
            "section" => sections.push(value.trim().to_string()),
            "id" => globs.push(id_pattern(value.trim())?),
            other => return Err(Error::InvalidArgument(format!("unknown filter key `{other}`"))),
        }
    }
    for id in &sel.ids {
        corpus.get(id)?;
    }
    let out: Vec<&Claim> = corpus
        .claims()
        .iter()
        .filter(|c| base.matches(c))
        .filter(|c| kind_filter.is_empty() || kind_filter.contains(&c.kind()))
        .filter(|c| sections.is_empty() || sections.iter().any(|s| c.meta().section.starts_with(s.as_str())))
        .filter(|c| {
            (globs.is_empty() && sel.ids.is_empty())
                || globs.iter().any(|g| g.is_match(c.id()))
                || sel.ids.iter().any(|i| i == c.id())
        })
        .collect();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no claims match the selection".into()));
    }
    Ok(out)
}

/// Shell-style `*` and `?` wildcards over the whole id.
fn id_pattern(glob: &str) -> Result<Regex> {
    let body: String = glob
        .chars()
        .map(|c| match c {
            '*' => ".*".to_string(),
            '?' => ".".to_string(),
            c => regex::escape(&c.to_string()),
        })
        .collect();
    Regex::new(&format!("^{body}$")).map_err(|e| Error::InvalidArgument(format!("bad id pattern `{glob}`: {e}")))
}

fn verify(corpus: &Corpus, sel: &Selection, digits: Option<u32>, allow_heuristic: bool, exec: Exec) -> Result<Report> {
    if digits.is_some_and(|d| d < 10) {
        return Err(Error::InvalidArgument("digits must be at least 10".into()));
    }
    let chosen = select(corpus, sel, &[ClaimKind::Series])?;
    let filter = Filter { ids: chosen.iter().map(|c| c.id().to_string()).collect(), ..Filter::default() };
    let opts = EvalOptions { rigorous_only: !allow_heuristic, ..EvalOptions::default() };
    let reports = batch_verify(
        corpus,
        &filter,
        |s| digits.unwrap_or(if s.meta.status.is_proven() { 60 } else { 40 }),
        &opts,
        exec,
    );
    let mut out = Report::new(
        "verify",
        json!({"filters": sel.filters, "ids": sel.ids, "digits": digits, "allow_heuristic": allow_heuristic}),
    );
    for r in reports {
        let badge = serde_json::to_value(r.badge).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let tail = r.tail.as_ref().map(|t| format!("{:?}", t.mode).to_uppercase()).unwrap_or_else(|| "-".into());
        let line = match &r.error {
            Some(e) => format!("{badge:<9} {:<28} {e}", r.id),
            None => format!(
                "{badge:<9} {:<28} D={:<4} agree={:<4} tail={tail:<10} {} = {}",
                r.id,
                r.digits,
                r.agreement,
                r.claimed,
                r.lhs.as_ref().map(|b| b.mid.as_str()).unwrap_or("")
            ),
        };
        let id = r.id.clone();
        out.push(&r, Some(r.pass), || id, line);
    }
    Ok(out)
}

fn family_tag(name: &str) -> Result<FamilyTag> {
    FamilyTag::ALL
        .into_iter()
        .find(|t| t.as_str().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Unknown { kind: "family", name: name.to_string() })
}

fn telescope(all: bool, names: &[String], ms: &[String], n: i64, exec: Exec) -> Result<Report> {
    let tags = if names.is_empty() || all {
        FamilyTag::ALL.to_vec()
    } else {
        names.iter().map(|s| family_tag(s)).collect::<Result<Vec<_>>>()?
    };
    let ms: Vec<Rational> = if ms.is_empty() {
        standard_m_values()
    } else {
        ms.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?
    };
    let m_text: Vec<String> = ms.iter().map(format_rational).collect();
    let mut out = Report::new("telescope", json!({"families": tags, "m": m_text, "n": n}));
    let rows = exec.map(&tags, |&tag| {
        let f = TelescopeFamily::get(tag);
        (verify_induction_step(&f), verify_instances(&f, &ms, n))
    });
    for (induction, instances) in rows {
        let instances = instances?;
        let pass = induction.pass && instances.pass;
        let line = format!(
            "{:<6} {:<8} induction={} instances={} checked={} skipped_m=[{}]",
            if pass { "PASS" } else { "FAIL" },
            induction.family.as_str(),
            if induction.pass { "zero-residual" } else { "NONZERO" },
            if instances.pass { "ok" } else { "MISMATCH" },
            instances.checked,
            instances.skipped.join(",")
        );
        let tag = induction.family.as_str().to_string();
        out.push(json!({"family": induction.family, "induction": induction, "instances": instances}), Some(pass), || tag, line);
    }
    if all || names.is_empty() {
        let shift = verify_shift_identity(200);
        let line = format!(
            "{:<6} shift    binomial index shift checked to k={}",
            if shift.pass { "PASS" } else { "FAIL" },
            shift.checked_up_to
        );
        out.push(json!({"shift_identity": shift}), Some(shift.pass), || "shift-identity".into(), line);
    }
    Ok(out)
}

fn parse_prime_range(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::InvalidArgument(format!("prime range `{s}` is not LO..HI"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty prime range {lo}..{hi}")));
    }
    Ok((lo, hi))
}

fn congruence(corpus: &Corpus, a: &crate::CongruenceArgs, exec: Exec) -> Result<Report> {
    let (lo, hi) = parse_prime_range(&a.primes)?;
    let claims = select(corpus, &a.select, &[ClaimKind::Congruence, ClaimKind::Integrality])?;
    let plan = ScanPlan {
        primes: primes_in(lo, hi),
        padic_n: (1..=a.padic_n_max).collect(),
        integer_n: (1..=a.n_max).collect(),
    };
    let ckpt = match &a.checkpoint {
        Some(p) => Checkpoint::open(p)?,
        None => Checkpoint::none(),
    };
    let mut out = Report::new(
        "congruence",
        json!({"filters": a.select.filters, "ids": a.select.ids, "primes": [lo, hi], "n_max": a.n_max, "padic_n_max": a.padic_n_max}),
    );
    for r in scan(&claims, &plan, &ckpt, exec) {
        let at = match (r.p, r.n) {
            (Some(p), Some(n)) => format!("p={p} n={n}"),
            (Some(p), None) => format!("p={p}"),
            (None, Some(n)) => format!("n={n}"),
            (None, None) => String::new(),
        };
        let status = match (&r.skipped, r.pass) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        let detail = match &r.skipped {
            Some(why) => why.clone(),
            None if r.valuation.is_empty() => String::new(),
            None => format!("v_p={} need>={}", r.valuation, r.required),
        };
        let line = format!("{status:<5} {:<26} {at:<12} {detail}", r.id);
        let pass = if r.skipped.is_some() { None } else { Some(r.pass) };
        let failure = format!("{} {at}", r.id);
        out.push(&r, pass, || failure, line);
    }
    Ok(out)
}

fn certificates(corpus: &Corpus, all: bool, ids: &[String], order: usize, exec: Exec) -> Result<Report> {
    let sel = Selection { ids: ids.to_vec(), ..Selection::default() };
    let everything = all || ids.is_empty();
    let specs: Vec<_> = select(corpus, &sel, &[ClaimKind::Certificate])?
        .into_iter()
        .filter_map(|c| match c {
            Claim::Certificate(s) => Some(s),
            _ => None,
        })
        .collect();
    let mut out = Report::new("certificates", json!({"ids": ids, "functional_equation_order": everything.then_some(order)}));
    for r in exec.map(&specs, |s| check_certificate(s)) {
        let failed: Vec<&str> = r.stages.iter().filter(|s| !s.pass).map(|s| s.name).collect();
        let line = format!(
            "{:<5} {:<14} stages={}/{} branches={} endpoint={}d quadrature={}d{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.stages.len() - failed.len(),
            r.stages.len(),
            r.branch_points.len(),
            r.endpoint_digits,
            r.quadrature_digits,
            if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join(",")) }
        );
        let failure = format!("{} [{}]", r.id, failed.join(","));
        out.push(&r, Some(r.pass), || failure, line);
    }
    if everything {
        let fe = verify_functional_equation(order);
        let line = format!("{:<5} functional-equation (f-1)(3f+1)^3 = x(4f)^4 to order {}", if fe.pass { "PASS" } else { "FAIL" }, fe.order);
        out.push(json!({"functional_equation": fe}), Some(fe.pass), || "functional-equation".into(), line);
    }
    Ok(out)
}

/// Splits at top-level commas and reads each piece as a product of constants.
fn parse_basis(text: &str) -> Result<Vec<Monomial>> {
    let mut pieces = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&text[start..]);
    let mut out = Vec::new();
    for p in pieces.iter().map(|p| p.trim()).filter(|p| !p.is_empty()) {
        let cf: ClosedForm = p.parse()?;
        out.extend(cf.terms().iter().map(|t| t.factors.clone()));
    }
    Ok(out)
}

fn discover(corpus: &Corpus, sel: &Selection, basis: Option<&str>, digits: u32, exec: Exec) -> Result<Report> {
    let claims = select(corpus, sel, &[ClaimKind::Series])?;
    let explicit = basis.map(parse_basis).transpose()?;
    let series: Vec<_> = claims.iter().filter_map(|c| c.as_series()).collect();
    let found = exec.map(&series, |s| {
        let basis = explicit.clone().unwrap_or_else(|| {
            let mut b: Vec<Monomial> = s.rhs.terms().iter().map(|t| t.factors.clone()).collect();
            b.push(vec![(Constant::Pi, 1)]);
            b.push(vec![(Constant::Log(Rational::from_integer(2.into())), 1)]);
            b
        });
        discover_rhs(s, &basis, digits, &DiscoverOptions::default())
    });
    let mut out = Report::new("discover", json!({"filters": sel.filters, "ids": sel.ids, "basis": basis, "digits": digits}));
    for (s, d) in series.iter().zip(found) {
        let id = s.meta.id.clone();
        match d {
            Ok(Some(d)) => {
                let line = format!(
                    "{:<8} {:<28} candidate {} (claimed {}) confidence {}d EVIDENCE-ONLY",
                    if d.matches_claimed { "MATCH" } else { "DIFFERS" },
                    d.id,
                    d.display,
                    d.claimed,
                    d.relation.confidence_digits
                );
                let pass = d.matches_claimed;
                out.push(&d, Some(pass), || id, line);
            }
            Ok(None) => {
                let line = format!("{:<8} {id:<28} no relation within the coefficient bounds", "NONE");
                out.push(json!({"id": id, "label": "EVIDENCE-ONLY", "relation": null}), Some(false), || id.clone(), line);
            }
            Err(e) => {
                let line = format!("{:<8} {id:<28} {e}", "ERROR");
                out.push(json!({"id": id, "error": e.to_string()}), Some(false), || id.clone(), line);
            }
        }
    }
    Ok(out)
}

fn corpus_cmd(corpus: &Corpus, action: &CorpusAction) -> Result<Report> {
    match action {
        CorpusAction::List(sel) => {
            let all = [ClaimKind::Series, ClaimKind::Congruence, ClaimKind::Integrality, ClaimKind::Certificate];
            let claims = select(corpus, sel, &all)?;
            let mut out = Report::new("corpus-list", json!({"filters": sel.filters, "ids": sel.ids}));
            let entries = manifest(corpus);
            for c in claims {
                let m = c.meta();
                let line = format!("{:<28} {:<12} {:<22} §{:<3} {}", m.id, kind_name(c.kind()), m.status.to_string(), m.section, m.anchor);
                let entry = entries.iter().find(|e| e.id == m.id);
                out.push(entry, None, String::new, line);
            }
            out.skipped = 0;
            Ok(out)
        }
        CorpusAction::Validate => {
            // loading already checked the manifest counts and parsed every entry
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for c in corpus.claims() {
                *counts.entry(c.meta().status.to_string()).or_default() += 1;
            }
            let mut out = Report::new("corpus-validate", json!({}));
            let line = format!(
                "OK    {} claims ({})",
                corpus.len(),
                counts.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ")
            );
            out.push(json!({"claims": corpus.len(), "counts": counts}), Some(true), String::new, line);
            Ok(out)
        }
        CorpusAction::Manifest => {
            let mut out = Report::new("corpus-manifest", json!({}));
            for e in manifest(corpus) {
                let line = serde_json::to_string(&e).unwrap_or_default();
                out.push(&e, None, String::new, line);
            }
            out.skipped = 0;
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_ranges() {
        assert_eq!(parse_prime_range("5..31").unwrap(), (5, 31));
        assert_eq!(parse_prime_range("5..=31").unwrap(), (5, 31));
        assert!(parse_prime_range("31..5").is_err());
        assert!(parse_prime_range("5-31").is_err());
    }

    #[test]
    fn basis_splits_at_top_level() {
        let b = parse_basis("pi, log(2), pi/sqrt(3)").unwrap();
        assert_eq!(b.len(), 3);
        // pi/sqrt(3) is stored as pi*sqrt(3)/3; only the monomial matters
        assert_eq!(b[2], vec![(Constant::Pi, 1), (Constant::Sqrt(3), 1)]);
    }

    #[test]
    fn selection_rules() {
        let corpus = corpus_load().unwrap();
        let sel = |f: &[&str]| Selection { filters: f.iter().map(|s| s.to_string()).collect(), ids: vec![] };
        let th = select(&corpus, &sel(&["status=theorem"]), &[ClaimKind::Series]).unwrap();
        assert_eq!(th.len(), 9);
        let g = select(&corpus, &sel(&["id=thm1.2-*"]), &[ClaimKind::Series]).unwrap();
        assert_eq!(g.len(), 4);
        let both = select(&corpus, &sel(&["status=theorem", "status=cited", "section=1"]), &[ClaimKind::Series]).unwrap();
        assert!(both.len() > 9 && both.iter().all(|c| c.meta().section == "1"));
        assert!(select(&corpus, &sel(&["colour=red"]), &[ClaimKind::Series]).is_err());
        assert!(select(&corpus, &sel(&["id=nothing*"]), &[ClaimKind::Series]).is_err());
    }
}
