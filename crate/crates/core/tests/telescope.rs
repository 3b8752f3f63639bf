use serieslab_core::exact::{int, rat};
use serieslab_core::telescope::*;

#[test]
fn every_family_passes_the_induction_step() {
    for f in TelescopeFamily::all() {
        let r = verify_induction_step(&f);
        assert!(r.pass, "{}: base {} step {}", f.tag, r.base_residual, r.step_residual);
    }
}

#[test]
fn instances_agree_with_closed_forms() {
    for f in TelescopeFamily::all() {
        let r = verify_instances(&f, &standard_m_values(), 60).unwrap();
        assert!(r.pass, "{r:?}");
    }
    let t = TelescopeFamily::get(FamilyTag::T13Odd);
    assert!(verify_instances(&t, &[int(16)], 200).unwrap().pass);
}

#[test]
fn a_flipped_sign_is_caught() {
    let mut f = TelescopeFamily::get(FamilyTag::L213K2);
    f.closed_numerator = f.closed_numerator.neg();
    assert!(!verify_induction_step(&f).pass);
    let r = verify_instances(&f, &[int(1)], 10).unwrap();
    assert_eq!(r.failure, Some(("1".to_string(), 1)));

    let mut g = TelescopeFamily::get(FamilyTag::L36K1);
    g.numerator = g.numerator.add(&serieslab_core::poly::Poly2::n());
    assert!(!verify_induction_step(&g).pass);
}

#[test]
fn shift_identity_holds() {
    let r = verify_shift_identity(500);
    assert!(r.pass, "{r:?}");
}

#[test]
fn fixed_family_rejects_other_m() {
    let t = TelescopeFamily::get(FamilyTag::T13Odd);
    assert!(t.term(&int(3), 1).is_err());
    let r = verify_instances(&t, &standard_m_values(), 5).unwrap();
    assert_eq!(r.skipped.len(), 8);
}

#[test]
fn closed_forms_approach_the_limit() {
    // |closed(m,n) - limit| shrinks once m^n binom(4n,n)^(-e) grows
    let ms = [int(1), int(-8), rat(1, 8), rat(-3, 25), rat(9, 8), int(10), int(-12), rat(77, 7)];
    for f in TelescopeFamily::all() {
        for m in &ms {
            if f.fixed_m.as_ref().is_some_and(|v| v != m) || abs(m) <= f.radius {
                continue;
            }
            let gaps: Vec<_> = (40..60).map(|n| abs(&(f.closed_form_partial(m, n).unwrap() - f.limit(m)))).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{} at m = {m}", f.tag);
        }
    }
}

fn abs(q: &serieslab_core::Rational) -> serieslab_core::Rational {
    if *q < int(0) { -q.clone() } else { q.clone() }
}
