//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use covcheck::commands::{run_checker, Settings};
use covcheck::source::Source;
use covcore::typing::CheckReport;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_file(name: &str) -> PathBuf {
    corpus_dir().join(format!("{name}.cov"))
}

pub fn load(name: &str) -> Source {
    Source::load(&corpus_file(name)).unwrap_or_else(|e| panic!("{e}"))
}

/// Bounded check of a corpus file under `settings`.
pub fn check_with(name: &str, settings: &Settings) -> CheckReport {
    run_checker(&load(name), settings).expect("bounded backend needs no configuration")
}

pub fn check(name: &str) -> CheckReport {
    check_with(name, &Settings::default())
}

/// Coarse outcome of a check: `accepted`, `inconclusive` or `rejected:<code>`.
pub fn outcome(report: &CheckReport) -> String {
    match &report.result {
        Ok(()) => "accepted".into(),
        Err(e) if e.is_inconclusive() => "inconclusive".into(),
        Err(e) => format!("rejected:{}", e.code()),
    }
}
