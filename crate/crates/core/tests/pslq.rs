use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use serieslab_core::ball::{bits_for_digits, Ball};
use serieslab_core::closed_form::{ClosedForm, Constant};
use serieslab_core::exact::int;
use serieslab_core::identity::{corpus_load, SeriesIdentity};
use serieslab_core::pslq::*;

const THEOREMS: [&str; 9] = [
    "thm1.1-eq9/8",
    "thm1.1-eq8",
    "thm1.2-eq-2",
    "thm1.2-eq-8",
    "thm1.2-eq-24",
    "thm1.2-eq-192",
    "thm1.3-eq17",
    "thm1.3-eq1",
    "thm1.3-eq-1/3",
];

fn series(id: &str) -> SeriesIdentity {
    corpus_load().unwrap().series(id).unwrap().clone()
}

fn log(q: i64) -> Monomial {
    vec![(Constant::Log(int(q)), 1)]
}

fn pi() -> Monomial {
    vec![(Constant::Pi, 1)]
}

// a shared basis wide enough for every theorem in the corpus
fn wide_basis() -> Vec<Monomial> {
    vec![vec![], pi(), vec![(Constant::Pi, 1), (Constant::Sqrt(3), -1)], log(2), log(3)]
}

fn eval(cf: &str, digits: u32) -> Ball {
    cf.parse::<ClosedForm>().unwrap().eval(bits_for_digits(digits)).unwrap()
}

fn ints(r: &RelationResult) -> Vec<i64> {
    r.coefficients.iter().map(|c| c.to_i64().unwrap()).collect()
}

#[test]
fn gosper_relation() {
    // 2 * (pi/2) - pi = 0
    let s = series("intro-gosper");
    let v = serieslab_core::series::evaluate_series(&s, 50).unwrap().value;
    let vals = [v, eval("1", 50), eval("pi", 50), eval("log(2)", 50)];
    let r = pslq(&vals, &[], 40, &PslqParams::default()).unwrap();
    assert_eq!(ints(r.relation().unwrap()), vec![2, 0, -1, 0]);
}

#[test]
fn rediscovers_three_halves_pi() {
    let d = discover_rhs(&series("thm1.1-eq8"), &[pi()], 60, &DiscoverOptions::default()).unwrap().unwrap();
    assert!(d.matches_claimed);
    assert_eq!(d.display, "3/2*pi");
    assert_eq!(d.label, "EVIDENCE-ONLY");
}

#[test]
fn rediscovers_log_three_quarters() {
    let d = discover_rhs(&series("thm1.2-eq-192"), &[log(2), log(3)], 60, &DiscoverOptions::default()).unwrap().unwrap();
    assert!(d.matches_claimed);
    assert_eq!(d.candidate, "log(3)-2log(2)".parse::<ClosedForm>().unwrap().expand_logs());
    assert_eq!(d.display, "log(3/4)");
}

#[test]
fn wrong_basis_finds_nothing() {
    let basis = vec![vec![(Constant::Zeta(3), 1)]];
    assert!(discover_rhs(&series("thm1.1-eq8"), &basis, 60, &DiscoverOptions::default()).unwrap().is_none());
}

#[test]
fn every_theorem_round_trips() {
    for id in THEOREMS {
        let s = series(id);
        let d = discover_rhs(&s, &wide_basis(), 60, &DiscoverOptions::default()).unwrap();
        let d = d.unwrap_or_else(|| panic!("{id}: no relation"));
        assert!(d.matches_claimed, "{id}: found {} claimed {}", d.display, d.claimed);
        assert!(d.relation.confidence_digits >= 40, "{id}: {:?}", d.relation);
    }
}

#[test]
fn stable_under_more_digits() {
    for id in ["thm1.2-eq-24", "thm1.1-eq9/8"] {
        let s = series(id);
        let a = discover_rhs(&s, &wide_basis(), 40, &DiscoverOptions::default()).unwrap().unwrap();
        let b = discover_rhs(&s, &wide_basis(), 60, &DiscoverOptions::default()).unwrap().unwrap();
        assert_eq!(a.candidate, b.candidate, "{id}");
    }
}

#[test]
fn basis_is_canonical() {
    let b = canonical_basis(&[vec![(Constant::Log("3/4".parse().unwrap()), 1)], log(2)]);
    assert_eq!(b, vec![vec![], log(2), log(3)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    // A combination carrying zeta(3) has no relation over {1, pi, log 2}.
    #[test]
    fn no_false_relations(a in -50i64..50, b in -50i64..50, c in 1i64..50, d in -50i64..50) {
        let v = eval(&format!("{a}+{b}pi+{c}zeta(3)+{d}log(2)"), 80);
        let vals = [v, eval("1", 80), eval("pi", 80), eval("log(2)", 80)];
        let out = pslq(&vals, &[], 60, &PslqParams::default()).unwrap();
        prop_assert!(out.relation().is_none(), "{:?}", out);
    }

    // With zeta(3) in the basis the same combination is recovered exactly.
    #[test]
    fn recovers_planted_relation(a in -50i64..50, b in -50i64..50, c in 1i64..50) {
        let v = eval(&format!("{a}+{b}pi+{c}zeta(3)"), 80);
        let vals = [v, eval("1", 80), eval("pi", 80), eval("zeta(3)", 80)];
        let out = pslq(&vals, &[], 60, &PslqParams::default()).unwrap();
        let r = out.relation().expect("planted relation");
        let c0 = r.coefficients[0].clone();
        let scaled: Vec<BigInt> = r.coefficients.iter().map(|x| -x).collect();
        prop_assert_eq!(&scaled[1..], &[BigInt::from(a) * &c0, BigInt::from(b) * &c0, BigInt::from(c) * &c0][..]);
    }
}
