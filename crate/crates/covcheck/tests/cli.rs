//! End-to-end behaviour of the `covcheck` binary.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{corpus_dir, corpus_file, outcome};
use covcheck::commands::Settings;
use covcheck::source::collect;

fn covcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covcheck"))
        .args(args)
        .env_remove(covcheck::solver::SOLVER_ENV)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    corpus_file(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| covcheck(args).status.code();
    assert_eq!(code(&["check", &path("incor_42")]), Some(0));
    assert_eq!(code(&["check", &path("t1_lit_cover_top")]), Some(1));
    assert_eq!(code(&["check", "missing.cov"]), Some(2));
    assert_eq!(code(&["check", &path("over_app_window")]), Some(3));
    assert_eq!(
        code(&["check", &path("over_app_window"), "--window", "16"]),
        Some(0)
    );
    assert_eq!(code(&["emit-smt", &path("incor_42")]), Some(2));
    assert_eq!(code(&["check", &path("imp1"), "--backend", "smt"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn parse_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cov");
    fs::write(&bad, "check let x = in 1 : [int | true]").unwrap();
    let o = covcheck(&["check", bad.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["error"]["code"], "parse");
    assert_eq!(v["schema"], "covcheck/1");
}

#[test]
fn run_prints_outcome_set() {
    let o = covcheck(&["run", &path("incor_42"), "--window", "64"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"values":[11,42]}"#);
}

#[test]
fn json_reports_are_deterministic() {
    let dir = corpus_dir().display().to_string();
    let args = ["check", dir.as_str(), "--json", "--no-timing"];
    let (a, b) = (covcheck(&args), covcheck(&args));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), collect(&corpus_dir()).unwrap().len());
    let mut files = Vec::new();
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], "covcheck/1");
        assert!(v.get("elapsed_ms").is_none());
        for key in ["file", "goal", "result", "vcs", "window"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
        files.push(v["file"].as_str().unwrap().to_string());
    }
    let mut sorted = files.clone();
    sorted.sort();
    assert_eq!(files, sorted, "directory output is path-sorted");

    let timed = covcheck(&["check", &path("imp1"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(v["elapsed_ms"].is_u64());
}

#[test]
fn rejection_reports_carry_a_witness() {
    let o = covcheck(&["check", &path("incor_43"), "--json", "--no-timing"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"], "rejected");
    assert_eq!(v["error"]["code"], "vc-invalid");
    assert_eq!(v["error"]["witness"]["v"], 43);
    let last = v["vcs"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["verdict"], "invalid");
    assert_eq!(last["method"], "bounded(w=64)");
}

#[test]
fn oracle_and_diff_report_membership() {
    let o = covcheck(&["oracle", &path("foo_errors"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["membership"]["result"], "member");

    let o = covcheck(&["oracle", &path("flaky_client_stated")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("nonmember"));

    let o = covcheck(&["diff", &path("incor_43"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "consistent");
    assert_eq!(v["checker"], "err");
}

#[test]
fn diff_over_corpus_succeeds() {
    let dir = corpus_dir().display().to_string();
    for w in ["8", "16"] {
        let o = covcheck(&["diff", &dir, "--window", w]);
        assert_ne!(o.status.code(), Some(1), "{}", stdout(&o));
        assert!(!stdout(&o).contains("SOUNDNESS-BUG"));
    }
}

fn golden_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

#[test]
fn emit_smt_matches_goldens() {
    let golden = golden_dir().join("smt");
    let out = tempfile::tempdir().unwrap();
    let out_str = out.path().to_str().unwrap();
    let mut stems: Vec<String> = fs::read_dir(&golden)
        .unwrap()
        .map(|e| {
            e.unwrap()
                .file_name()
                .to_string_lossy()
                .split('.')
                .next()
                .unwrap()
                .to_string()
        })
        .collect();
    stems.sort();
    stems.dedup();
    for stem in &stems {
        let o = covcheck(&["emit-smt", &path(stem), "--out", out_str]);
        assert_eq!(o.status.code(), Some(0));
    }
    let names = |dir: &Path| {
        let mut v: Vec<String> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names(out.path()), names(&golden));
    for name in names(&golden) {
        let want = fs::read_to_string(golden.join(&name)).unwrap();
        let got = fs::read_to_string(out.path().join(&name)).unwrap();
        assert_eq!(got, want, "{name} differs from its golden copy");
    }
}

#[test]
fn mode_toggles_match_golden() {
    let golden = fs::read_to_string(golden_dir().join("modes.txt")).unwrap();
    let strict = Settings {
        strict_overapp: true,
        ..Settings::default()
    };
    let unit = Settings {
        assert_unit_payload: true,
        ..Settings::default()
    };
    let mut lines = vec!["# file  default  --strict-overapp  --assert-unit-payload".to_string()];
    for p in collect(&corpus_dir()).unwrap() {
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        let row: Vec<String> = [Settings::default(), strict.clone(), unit.clone()]
            .iter()
            .map(|s| outcome(&common::check_with(&name, s)))
            .collect();
        lines.push(format!("{name} {}", row.join(" ")));
    }
    let got = lines.join("\n") + "\n";
    assert_eq!(got, golden);
}
