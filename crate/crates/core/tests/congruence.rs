use num_bigint::BigInt;
use num_rational::BigRational;
use serieslab_core::congruence::*;
use serieslab_core::dsl;
use serieslab_core::exact::primes_in;
use serieslab_core::identity::{corpus_load, parse_identity, Claim, CongruenceClaim, IntegralityClaim};
use serieslab_core::parallel::Exec;

fn harmonic_claim(modulus: u32) -> CongruenceClaim {
    let doc = format!(
        r#"{{"id": "wolstenholme", "kind": "congruence", "status": "theorem", "section": "test", "anchor": "control", "quote": "",
            "summand": {{"numerator": "1", "denominator": ["k"]}},
            "range": "1..p-1", "rhs": "0", "modulus": {modulus},
            "constraints": {{"min_prime": 5}}}}"#
    );
    match parse_identity(&doc).unwrap() {
        Claim::Congruence(c) => c,
        _ => unreachable!(),
    }
}

// H_{p-1} summed term by term with no shared tables
fn naive_harmonic(p: u64) -> BigRational {
    (1..p).map(|k| BigRational::new(1.into(), BigInt::from(k))).sum()
}

fn corpus_congruence(id: &str) -> CongruenceClaim {
    match corpus_load().unwrap().get(id).unwrap() {
        Claim::Congruence(c) => c.clone(),
        _ => panic!("{id}"),
    }
}

fn corpus_integrality(id: &str) -> IntegralityClaim {
    match corpus_load().unwrap().get(id).unwrap() {
        Claim::Integrality(c) => c.clone(),
        _ => panic!("{id}"),
    }
}

#[test]
fn wolstenholme_control() {
    let c = harmonic_claim(2);
    for p in primes_in(5, 97) {
        assert_eq!(sum_range_exact(&c, p).unwrap(), naive_harmonic(p));
        let r = check_congruence(&c, p).unwrap();
        assert!(r.pass, "p = {p}: {r:?}");
        // no Wolstenholme prime below 16843, so p^3 never divides
        assert_eq!(r.valuation, "2", "p = {p}");
    }
    let strict = harmonic_claim(3);
    assert!(congruence_scan(&strict, &primes_in(5, 97)).iter().all(|r| !r.pass && r.skipped.is_none()));
}

#[test]
fn inadmissible_primes_are_skipped() {
    let c = harmonic_claim(2);
    assert!(check_congruence(&c, 3).is_err());
    assert!(check_congruence(&c, 9).is_err());
    let rs = congruence_scan(&c, &[3, 5, 7]);
    assert!(rs[0].skipped.is_some() && !rs[0].pass);
    assert!(rs[1].pass && rs[2].pass);
}

#[test]
fn corpus_congruences_hold_for_small_primes() {
    let corpus = corpus_load().unwrap();
    let claims: Vec<&Claim> =
        corpus.claims().iter().filter(|c| matches!(c, Claim::Congruence(_) | Claim::Integrality(_))).collect();
    assert!(claims.len() >= 30);
    let plan = ScanPlan { integer_n: (1..=60).collect(), ..ScanPlan::default() };
    let rs = scan(&claims, &plan, &Checkpoint::none(), Exec::Parallel);
    let failed: Vec<_> = rs.iter().filter(|r| r.skipped.is_none() && !r.pass).collect();
    assert!(failed.is_empty(), "{failed:?}");
    let (passed, _, skipped) = tally(&rs);
    assert!(passed > 350 && skipped < passed / 10, "{passed} {skipped}");
}

#[test]
fn right_hand_side_is_exact() {
    // 21/4 * 5 * H_4 = 875/16
    let c = corpus_congruence("c2025-02-16-ii");
    assert_eq!(eval_rhs_symbolic(&c, 5).unwrap(), BigRational::new(875.into(), 16.into()));
}

#[test]
fn perturbed_right_hand_side_fails() {
    let mut c = corpus_congruence("c2025-02-16-ii");
    c.rhs_expr = dsl::parse("22/4*p*H(p-1)").unwrap();
    let rs = congruence_scan(&c, &primes_in(5, 31));
    assert!(rs.iter().all(|r| !r.pass), "{rs:?}");
}

#[test]
fn divisibility_quotient_at_one() {
    // n = 1: 18 / (6 * 1 * 1 * 3)
    let c = corpus_integrality("i2023-10-13-ii-int");
    assert!(check_integer_divisibility(&c, 1).unwrap().pass);
    let mut broken = c.clone();
    broken.divisor_expr = dsl::parse("12n(2n-1)binom(3n,n)").unwrap();
    assert!(!check_integer_divisibility(&broken, 1).unwrap().pass);
}

#[test]
fn displayed_padic_claim_fails() {
    let good = corpus_integrality("i2023-10-13-ii-padic");
    let mut shown = good.clone();
    shown.parts[1].exprs[2] = dsl::parse("p-1").unwrap();
    for p in primes_in(5, 23) {
        assert!(check_padic_integrality(&good, p, 2).unwrap().pass);
        let r = check_padic_integrality(&shown, p, 2).unwrap();
        assert!(!r.pass && r.valuation.starts_with('-'), "{r:?}");
    }
}

#[test]
fn checkpoint_resume_matches_fresh_run() {
    let path = std::env::temp_dir().join(format!("serieslab-ckpt-{}.tsv", std::process::id()));
    let _ = std::fs::remove_file(&path);
    let corpus = corpus_load().unwrap();
    let claims: Vec<&Claim> = corpus.claims().iter().filter(|c| matches!(c, Claim::Congruence(_))).take(5).collect();
    let plan = ScanPlan { primes: primes_in(5, 19), ..ScanPlan::default() };

    let first = scan(&claims, &plan, &Checkpoint::open(&path).unwrap(), Exec::Sequential);
    let ckpt = Checkpoint::open(&path).unwrap();
    assert_eq!(ckpt.len(), first.iter().filter(|r| r.skipped.is_none()).count());
    let second = scan(&claims, &plan, &ckpt, Exec::Parallel);
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!((&a.id, a.p, &a.valuation, a.pass), (&b.id, b.p, &b.valuation, b.pass));
        assert_eq!(b.resumed, a.skipped.is_none());
    }
    // resumed records are not written twice
    drop(ckpt);
    assert_eq!(Checkpoint::open(&path).unwrap().len(), std::fs::read_to_string(&path).unwrap().lines().count());
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn sequential_and_parallel_agree() {
    let corpus = corpus_load().unwrap();
    let claims: Vec<&Claim> = corpus.claims().iter().filter(|c| matches!(c, Claim::Congruence(_))).collect();
    let plan = ScanPlan { primes: primes_in(5, 23), ..ScanPlan::default() };
    let strip = |v: Vec<CheckResult>| v.into_iter().map(|r| (r.id, r.p, r.valuation, r.pass)).collect::<Vec<_>>();
    let a = strip(scan(&claims, &plan, &Checkpoint::none(), Exec::Sequential));
    let b = strip(scan(&claims, &plan, &Checkpoint::none(), Exec::Parallel));
    assert_eq!(a, b);
}
