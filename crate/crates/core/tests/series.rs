use std::time::{Duration, Instant};

use num_traits::Signed;
use serieslab_core::closed_form::ClosedForm;
use serieslab_core::exact::Rational;
use serieslab_core::identity::{corpus_load, parse_identity, serialize_claim, Claim, SeriesIdentity};
use serieslab_core::series::{evaluate_series, evaluate_series_with, verify_identity, EvalOptions, TailMode};

fn series(id: &str) -> SeriesIdentity {
    corpus_load().unwrap().series(id).unwrap().clone()
}

/// Rebuilds a corpus entry with one summand field replaced.
fn with_summand(id: &str, field: &str, value: &str) -> SeriesIdentity {
    let s = series(id);
    let mut v = serialize_claim(&Claim::Series(s));
    v["summand"][field] = value.into();
    // a different summand may have a different rate; let the parser derive it
    v.as_object_mut().unwrap().remove("rate");
    match parse_identity(&v.to_string()).unwrap() {
        Claim::Series(s) => s,
        _ => unreachable!(),
    }
}

fn same_value(a: &ClosedForm, b: &str) -> bool {
    a.expand_logs() == b.parse::<ClosedForm>().unwrap().expand_logs()
}

// values as printed in the statements the corpus entries quote
const PROVEN: [(&str, &str); 27] = [
    ("thm1.1-eq9/8", "2pi/sqrt(3)"),
    ("thm1.1-eq8", "3/2*pi"),
    ("thm1.2-eq-2", "-3log(2)"),
    ("thm1.2-eq-8", "-3log(2)"),
    ("thm1.2-eq-24", "log(2/3)"),
    ("thm1.2-eq-192", "log(3/4)"),
    ("thm1.3-eq17", "17"),
    ("thm1.3-eq1", "1"),
    ("thm1.3-eq-1/3", "-1/3"),
    ("lem2.2", "1944+640pi/sqrt(3)"),
    ("lem2.3", "30-3/2*pi"),
    ("lem2.4", "108+15/2*pi"),
    ("lem3.1", "-30-192log(2)"),
    ("lem3.2", "-297-120log(2)"),
    ("lem3.3-m-2", "48log(2)-246"),
    ("lem3.3-m-24", "-94-64log(2/3)"),
    ("lem3.3-m-192", "26+512log(3/4)"),
    ("lem3.4-m-2", "-189-30log(2)"),
    ("lem3.4-m-24", "40log(2/3)-117"),
    ("lem3.4-m-192", "160log(3/4)-207"),
    ("lem3.5", "-5"),
    ("rem3.2-2k1", "-64(592+45log(2))"),
    ("rem3.2-4k3", "-64(2818+45log(2))"),
    ("intro-gosper", "pi/2"),
    ("intro-ramanujan4096", "16/pi"),
    ("intro-zeta5", "180zeta(5)-56/3*pi^2*zeta(3)"),
    ("intro-ramanujan4096-harmonic", "2pi/69"),
];

#[test]
fn proven_values_at_sixty_digits() {
    for (id, value) in PROVEN {
        let s = series(id);
        assert!(same_value(&s.rhs, value), "{id}: corpus has {}", s.rhs);
        let t = Instant::now();
        let r = verify_identity(&s, 60).unwrap();
        assert!(r.pass && r.agreement >= 57, "{id}: {r:?}");
        assert!(t.elapsed() < Duration::from_secs(5), "{id} took {:?}", t.elapsed());
    }
}

#[test]
fn corrupted_right_hand_side_fails() {
    let mut s = series("thm1.3-eq17");
    s.rhs = ClosedForm::rational(Rational::from_integer(17.into()) + Rational::new(1.into(), num_traits::pow(10.into(), 50)));
    let r = verify_identity(&s, 60).unwrap();
    assert!(!r.pass);
    assert!((49..=51).contains(&r.agreement), "{}", r.agreement);
    // the same perturbation is below the resolution at 40 digits
    assert!(verify_identity(&s, 40).unwrap().pass);

    let mut s = series("thm1.2-eq-24");
    s.rhs = "log(3/4)".parse().unwrap();
    assert!(!verify_identity(&s, 30).unwrap().pass);
}

#[test]
fn tail_bound_covers_the_next_stretch() {
    // the exact sum to 2N must lie in S(N) widened by its tail bound
    for id in ["thm1.1-eq8", "thm1.2-eq-8", "lem3.3-m-24", "c2025-02-18-i1", "intro-ramanujan4096-harmonic"] {
        let s = series(id);
        for n in [10i64, 30, 80] {
            let ev = evaluate_series_with(&s, 30, &EvalOptions { cutoff: Some(n), ..EvalOptions::default() }).unwrap();
            let (short, long) = (s.partial_sum_exact(n).unwrap(), s.partial_sum_exact(2 * n).unwrap());
            assert!(ev.value.contains(&long), "{id} N={n}");
            assert!(ev.tail.bound >= (long - short).abs(), "{id} N={n}");
        }
    }
}

#[test]
fn partial_sums_match_exact_rationals() {
    for id in ["thm1.1-eq9/8", "thm1.3-eq17", "lem2.2", "c2025-02-16-i1", "c2023-11-18a"] {
        let s = series(id);
        let exact = s.partial_sum_exact(s.start + 200).unwrap();
        let ev = evaluate_series_with(&s, 40, &EvalOptions { cutoff: Some(s.start + 200), ..EvalOptions::default() }).unwrap();
        assert_eq!(ev.terms, 200, "{id}");
        assert!(ev.partial.contains(&exact), "{id}");
    }
}

#[test]
fn thirty_and_sixty_digits_agree() {
    for id in ["thm1.1-eq9/8", "thm1.2-eq-192", "lem3.4-m-24", "c2025-02-28a"] {
        let s = series(id);
        let a = evaluate_series(&s, 30).unwrap().value;
        let b = evaluate_series(&s, 60).unwrap().value;
        assert!(a.overlaps(&b), "{id}");
        assert!(b.rad() < a.rad(), "{id}");
    }
}

#[test]
fn harmonic_tails_are_labelled() {
    assert_eq!(evaluate_series(&series("c2025-02-16-i1"), 30).unwrap().tail.mode, TailMode::Heuristic);
    assert_eq!(evaluate_series(&series("thm1.3-eq1"), 30).unwrap().tail.mode, TailMode::Rigorous);
    let strict = EvalOptions { rigorous_only: true, ..EvalOptions::default() };
    assert!(evaluate_series_with(&series("c2025-02-16-i1"), 30, &strict).is_err());
}

#[test]
fn displayed_typos_fail_and_corrections_pass() {
    let cases = [
        with_summand("c2025-02-01-72b", "weight", "(3575k^2-1026k+67)Hgap(k)+242/13*(275k+12)"),
        with_summand("o2025-02-16-256b", "numerator", "5044k^2+310k-191"),
        with_summand("c2025-02-12-4096a", "weight", "(368k^3+400k^2+118k+6)(H(2k)+H(k))-128k^2-136k-31"),
        with_summand("c2023-11-18a", "weight", "(344k^3-386k^2+115k-9)(H(2k-1)-2H(k-1))-(4k-1)(58k^2+181k-66)/k"),
        with_summand("o2023-08-17-81", "binomials", "binom(2k,k)^-2*binom(3k,k)^-1"),
    ];
    for shown in cases {
        let id = shown.meta.id.clone();
        let r = verify_identity(&shown, 30).unwrap();
        assert!(!r.pass && r.agreement < 5, "{id} as displayed: {r:?}");
        assert!(verify_identity(&series(&id), 30).unwrap().pass, "{id} corrected");
    }
    // the base-72 display differs in base as well as in the linear term
    let base_only = with_summand("c2025-02-01-72b", "base", "1/72");
    assert!(!verify_identity(&base_only, 30).unwrap().pass);
}

#[test]
fn abstract_identity_with_fourth_order_harmonics() {
    let corpus = corpus_load().unwrap();
    let hit = corpus
        .claims()
        .iter()
        .filter_map(Claim::as_series)
        .find(|s| same_value(&s.rhs, "5/6*pi^3"))
        .expect("the (5/6)pi^3 identity is in the corpus");
    let r = verify_identity(hit, 40).unwrap();
    assert!(r.pass && r.agreement >= 37, "{r:?}");
}
