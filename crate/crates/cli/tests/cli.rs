use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_serieslab"));
    c.env_remove("SERIESLAB_CORPUS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("serieslab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

#[test]
fn theorems_verify_at_sixty_digits() {
    let (code, v) = json(&["verify", "--filter", "status=theorem", "--digits", "60"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "serieslab.report/1");
    assert_eq!(v["summary"]["passed"], 9);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["badge"], "VERIFIED");
        assert!(r["agreement"].as_u64().unwrap() >= 57);
    }
}

#[test]
fn single_identity_value() {
    let (code, v) = json(&["verify", "--id", "thm1.3-eq17", "--digits", "40"]);
    assert_eq!(code, 0);
    assert!(v["results"][0]["lhs"]["mid"].as_str().unwrap().starts_with("17.0000000000"));
}

#[test]
fn bad_configs_are_usage_errors() {
    assert_eq!(run(&["verify", "--digits", "5"]).status.code(), Some(2));
    assert_eq!(run(&["telescope", "--family", "L99"]).status.code(), Some(2));
    assert_eq!(run(&["congruence", "--primes", "31..5"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--filter", "status=proven-ish"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--id", "no-such-claim"]).status.code(), Some(2));
    assert_eq!(run(&["--parallel", "0", "corpus", "validate"]).status.code(), Some(2));
}

#[test]
fn conjectures_need_the_heuristic_flag_for_harmonic_tails() {
    let (code, v) = json(&["verify", "--id", "c2025-02-16-i1"]);
    assert_eq!(code, 1);
    assert!(v["results"][0]["error"].as_str().unwrap().contains("HEURISTIC"));
    let (code, v) = json(&["verify", "--id", "c2025-02-16-i1", "--allow-heuristic"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["results"][0]["badge"], "EVIDENCE");
    assert_eq!(v["results"][0]["tail"]["mode"], "HEURISTIC");
}

#[test]
fn telescope_families() {
    let (code, v) = json(&["telescope", "--all"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["passed"], 9);
    let (code, v) = json(&["telescope", "--family", "L21_3K2", "--m", "8/9", "--n", "100"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["instances"]["checked"], 100);
}

#[test]
fn certificates_and_corpus() {
    let (code, v) = json(&["certificates", "--all"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["passed"], 5);
    let (code, v) = json(&["corpus", "validate"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["claims"], 210);
}

#[test]
fn discovery_is_labelled_evidence() {
    let (code, v) = json(&["discover", "--id", "thm1.1-eq8", "--basis", "pi,log(2)"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["label"], "EVIDENCE-ONLY");
    assert_eq!(v["results"][0]["display"], "3/2*pi");
}

#[test]
fn parallelism_never_changes_the_report() {
    for args in [
        &["verify", "--filter", "section=1", "--filter", "status=theorem", "--digits", "30"][..],
        &["congruence", "--primes", "5..19", "--filter", "section=4"][..],
        &["telescope", "--all", "--n", "20"][..],
    ] {
        let one: Vec<&str> = ["--json", "--no-timing", "--parallel", "1"].iter().chain(args).copied().collect();
        let four: Vec<&str> = ["--json", "--no-timing", "--parallel", "4"].iter().chain(args).copied().collect();
        assert_eq!(run(&one).stdout, run(&four).stdout, "{args:?}");
    }
}

#[test]
fn report_file_and_checkpoint_resume() {
    let dir = scratch("ckpt");
    let ckpt = dir.join("scan.tsv");
    let report = dir.join("report.json");
    let args = |r: &Path| {
        vec![
            "--report".to_string(),
            r.display().to_string(),
            "congruence".into(),
            "--primes".into(),
            "5..23".into(),
            "--filter".into(),
            "id=c2023-08-21-*".into(),
            "--checkpoint".into(),
            ckpt.display().to_string(),
        ]
    };
    assert!(bin().args(args(&report)).output().unwrap().status.success());
    let lines = std::fs::read_to_string(&ckpt).unwrap().lines().count();
    assert_eq!(lines, 4 * 7);
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();

    let again = dir.join("again.json");
    assert!(bin().args(args(&again)).output().unwrap().status.success());
    let second: Value = serde_json::from_str(&std::fs::read_to_string(&again).unwrap()).unwrap();
    assert_eq!(first["summary"], second["summary"]);
    assert!(second["results"].as_array().unwrap().iter().all(|r| r["resumed"] == true));
    assert_eq!(std::fs::read_to_string(&ckpt).unwrap().lines().count(), lines);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn broken_corpus_entry_fails_with_exit_one() {
    let dir = scratch("corpus");
    for e in std::fs::read_dir(corpus_dir()).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dir.join(e.file_name())).unwrap();
    }
    let path = dir.join("series-proven.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for c in doc.as_array_mut().unwrap() {
        if c["id"] == "thm1.3-eq17" {
            c["rhs"] = "18".into();
        }
    }
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = bin()
        .env("SERIESLAB_CORPUS", &dir)
        .args(["--json", "verify", "--filter", "status=theorem", "--digits", "30"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failed"], 1);
    assert_eq!(v["failures"], serde_json::json!(["thm1.3-eq17"]));
    std::fs::remove_dir_all(&dir).unwrap();
}
