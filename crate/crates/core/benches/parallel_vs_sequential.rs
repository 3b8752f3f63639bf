use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use serieslab_core::congruence::{scan, Checkpoint, ScanPlan};
use serieslab_core::identity::{corpus_load, Claim, Filter, Status};
use serieslab_core::parallel::Exec;
use serieslab_core::series::{batch_verify, EvalOptions};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn batch_verify_bench(c: &mut Criterion) {
    let corpus = corpus_load().unwrap();
    let filter = Filter { statuses: vec![Status::Theorem, Status::Lemma], ..Filter::default() };
    let opts = EvalOptions::default();
    let mut g = c.benchmark_group("batch_verify_proven_d40");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let r = batch_verify(&corpus, &filter, |_| 40, &opts, exec);
                assert!(r.iter().all(|r| r.pass));
                r
            })
        });
    }
    g.finish();
}

fn congruence_scan_bench(c: &mut Criterion) {
    let corpus = corpus_load().unwrap();
    let claims: Vec<&Claim> =
        corpus.claims().iter().filter(|c| matches!(c, Claim::Congruence(_) | Claim::Integrality(_))).collect();
    let plan = ScanPlan { integer_n: (1..=60).collect(), ..ScanPlan::default() };
    let mut g = c.benchmark_group("congruence_scan_5_to_31");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| scan(&claims, &plan, &Checkpoint::none(), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, batch_verify_bench, congruence_scan_bench);
criterion_main!(benches);
