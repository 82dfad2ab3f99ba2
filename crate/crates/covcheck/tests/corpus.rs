//! Every corpus program meets the expectation written in its header.

mod common;

use covcheck::source::{collect, Expectation};
use covcore::typing::TypeError;

use common::{check_with, corpus_dir};

#[test]
fn corpus_is_large_enough() {
    assert!(collect(&corpus_dir()).unwrap().len() >= 25);
}

#[test]
fn corpus_meets_expectations() {
    let settings = Default::default();
    let mut failures = Vec::new();
    for path in collect(&corpus_dir()).unwrap() {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let src = covcheck::source::Source::load(&path).unwrap();
        let expect = src
            .expect
            .clone()
            .unwrap_or_else(|| panic!("{name} has no expect header"));
        let report = check_with(&name, &settings);
        let ok = match (&expect, &report.result) {
            (Expectation::Accept, Ok(())) => true,
            (Expectation::Reject(None), Err(e)) => !e.is_inconclusive(),
            (Expectation::Reject(Some(code)), Err(e)) => e.code() == code,
            _ => false,
        };
        if !ok {
            let got = report
                .result
                .as_ref()
                .err()
                .map_or("accepted".to_string(), TypeError::to_string);
            failures.push(format!("{name}: expected {expect:?}, got {got}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
