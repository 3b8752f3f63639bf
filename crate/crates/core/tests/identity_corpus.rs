use serieslab_core::identity::{corpus_filter, corpus_load, parse_identity, serialize_claim, ClaimKind, Filter, Status};

#[test]
fn bundled_corpus_loads() {
    let c = corpus_load().unwrap();
    assert!(c.len() > 200);
    let th = corpus_filter(&c, &Filter::status(Status::Theorem));
    assert_eq!(th.len(), 9);
    let cong = corpus_filter(&c, &Filter::kind(ClaimKind::Congruence));
    assert!(cong.iter().any(|c| c.id() == "c2025-02-16-ii"));
}

#[test]
fn round_trip_whole_corpus() {
    let c = corpus_load().unwrap();
    for claim in c.claims() {
        let v = serialize_claim(claim);
        let back = parse_identity(&v.to_string()).unwrap_or_else(|e| panic!("{}: {e}", claim.id()));
        assert_eq!(&back, claim, "{}", claim.id());
    }
}
