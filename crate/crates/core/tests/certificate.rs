use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serieslab_core::ball::{const_log, const_pi, Ball};
use serieslab_core::certificate::*;
use serieslab_core::dsl;
use serieslab_core::identity::{corpus_load, Claim, CertificateSpec};

fn cert(id: &str) -> CertificateSpec {
    match corpus_load().unwrap().get(id).unwrap() {
        Claim::Certificate(c) => c.clone(),
        _ => panic!("{id}"),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn close(b: &Ball, decimal: &str, digits: i32) -> bool {
    let (neg, body) = decimal.strip_prefix('-').map_or((false, decimal), |s| (true, s));
    let (int_part, frac) = body.split_once('.').unwrap();
    let num: BigInt = format!("{int_part}{frac}").parse().unwrap();
    let mut v = BigRational::new(num, BigInt::from(10).pow(frac.len() as u32));
    if neg {
        v = -v;
    }
    let tol = BigRational::new(BigInt::from(1), BigInt::from(10).pow(digits as u32));
    (b.mid() - v).abs() + b.rad() < tol
}

#[test]
fn every_bundled_certificate_passes() {
    let corpus = corpus_load().unwrap();
    let mut n = 0;
    for c in corpus.claims() {
        if let Claim::Certificate(spec) = c {
            let r = check_certificate(spec);
            assert!(r.pass, "{}", serde_json::to_string_pretty(&r).unwrap());
            assert_eq!(r.stage("derivative").unwrap().detail, "zero residual");
            n += 1;
        }
    }
    assert_eq!(n, 4);
}

#[test]
fn branch_crossing_in_lemma_2_3() {
    let spec = cert("lemma2.3");
    let f = ElementaryExpr::from_spec(&spec.antiderivative, spec.sqrt).unwrap();
    let bp = branch_points(&f).unwrap();
    assert_eq!(bp.len(), 1);
    assert!((bp[0].approx - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
    assert_eq!(bp[0].jump_over_pi, "3/2");

    // without the correction the endpoint difference is just -10
    let naive = corrected_endpoint_difference(&f, &[], 200).unwrap();
    assert!(naive.contains(&q(-10, 1)) || close(&naive, "-10.0", 30));
    let fixed = corrected_endpoint_difference(&f, &bp, 200).unwrap();
    assert!(close(&fixed, "-14.712388980384689857693965074919254326295754099063", 30));
    let quad = integrate_rational(&dsl::to_ratfunc(&dsl::parse(&spec.integrand).unwrap(), "x").unwrap(), &q(0, 1), &q(1, 1), 30)
        .unwrap();
    assert!(!quad.overlaps(&naive));
    assert!(quad.overlaps(&fixed));
}

#[test]
fn no_branch_points_elsewhere() {
    for id in ["lemma2.2", "lemma3.1", "lemma3.1-int"] {
        let spec = cert(id);
        let f = ElementaryExpr::from_spec(&spec.antiderivative, spec.sqrt).unwrap();
        assert!(branch_points(&f).unwrap().is_empty(), "{id}");
    }
}

#[test]
fn integral_of_q_over_cubic() {
    // reference value of 15 log 2 - 971/8 from an independent multiprecision library
    let r = check_certificate(&cert("lemma3.1-int"));
    assert!(r.pass);
    assert!(r.endpoint_digits >= 30 && r.quadrature_digits >= 25);
    let spec = cert("lemma3.1-int");
    let integrand = dsl::to_ratfunc(&dsl::parse(&spec.integrand).unwrap(), "x").unwrap();
    let v = integrate_rational(&integrand, &q(0, 1), &q(1, 1), 30).unwrap();
    assert!(close(&v, "-110.9777922916008203587415181781273514788674979846", 30));
}

#[test]
fn lemma_2_2_endpoint() {
    let r = check_certificate(&cert("lemma2.2"));
    assert!(r.pass);
    assert!(r.endpoint.unwrap().mid.starts_with("3104.831593109899424380210084890979668"));
}

#[test]
fn quadrature_oracles() {
    let f = |s: &str| dsl::to_ratfunc(&dsl::parse(s).unwrap(), "x").unwrap();
    let prec = 160;
    let v = integrate_rational(&f("1/(1+x^2)"), &q(0, 1), &q(1, 1), 30).unwrap();
    assert!(v.overlaps(&const_pi(prec).mul_rat(&q(1, 4))));
    assert!(v.rad() < q(1, 1_000_000_000_000_000) * q(1, 1_000_000_000_000_000));
    let v = integrate_rational(&f("1/(x+1)"), &q(0, 1), &q(1, 1), 30).unwrap();
    assert!(v.overlaps(&const_log(&q(2, 1), prec).unwrap()));
    assert!(integrate_rational(&f("1/(2x-1)"), &q(0, 1), &q(1, 1), 30).is_err());
}

#[test]
fn mutated_antiderivative_is_rejected() {
    let mut spec = cert("lemma3.1-int");
    spec.antiderivative.logs[0].coefficient = "16".into();
    let r = check_certificate(&spec);
    assert!(!r.pass);
    let d = r.stage("derivative").unwrap();
    assert!(!d.pass && d.detail.starts_with("residual"), "{d:?}");

    let mut spec = cert("lemma2.2");
    spec.antiderivative.arctans[0].coefficient = "91s".into();
    assert!(!check_certificate(&spec).stage("derivative").unwrap().pass);

    let mut spec = cert("lemma2.3");
    spec.moment.as_mut().unwrap().claimed = Some("(99z^2-29z-41)/(1-z)^3".into());
    assert!(!check_certificate(&spec).stage("moment").unwrap().pass);
}

#[test]
fn derivative_of_a_log() {
    let e = serieslab_core::identity::Antiderivative {
        rational: "0".into(),
        logs: vec![serieslab_core::identity::LogTerm { coefficient: "15".into(), argument: "x^3+x^2+2x+4".into() }],
        arctans: vec![],
    };
    let f = ElementaryExpr::from_spec(&e, 1).unwrap();
    let d = rational_function(&differentiate_elementary(&f)).unwrap();
    assert_eq!(d, dsl::to_ratfunc(&dsl::parse("15(3x^2+2x+2)/(x^3+x^2+2x+4)").unwrap(), "x").unwrap());
}

#[test]
fn functional_equation() {
    assert_eq!(functional_equation_mismatch(1, 3), None);
    assert!(verify_functional_equation(200).pass);
    assert_eq!(functional_equation_mismatch(50, 2), Some(1));
}

#[test]
fn beta_reductions() {
    assert_eq!(beta_rational(4, 2), q(1, 20));
    assert_eq!(beta_reduction_failure(100), None);
}
