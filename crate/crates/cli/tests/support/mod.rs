//! Property suites for the command line: reports replay bit-identically
//! from their provenance, and the JSON mirror parses back unchanged.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use oligo_cli::report::Report;
use oligo_core::algebraicity::NoAlgebraicityReport;
use oligo_core::groupoid::Fingerprint;
use oligo_core::imaginaries::EssentialReport;
use oligo_core::normalizer::InverseLimit;
use oligo_core::wu::WuSuiteReport;

pub fn corpus(name: &str) -> String {
    format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

pub fn oligo(args: &[String], env: &[(&str, String)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oligo"));
    cmd.args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("OLIGO_") {
            cmd.env_remove(k);
        }
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// One invocation per command, on small corpus inputs.
pub fn invocations() -> Vec<Vec<String>> {
    let c = corpus;
    let pure_fragment = oligo(&strings(&["fragment", &c("pure_set"), "--size", "3", "--output", "json"]), &[]);
    let fragment = scratch("replay_fragment.json", &String::from_utf8(pure_fragment.stdout).unwrap());
    let auto = scratch("replay_auto.json", r#"{"images": [0, 1, 2, 3, 4, 5, 6, 7, 8]}"#);
    vec![
        strings(&["orbits", &c("dlo"), "--arity", "3", "--list"]),
        strings(&["normalizer", &c("random_graph")]),
        strings(&["acl", &c("cycle_k2")]),
        strings(&["no-algebraicity", &c("cycle_k2")]),
        strings(&["merge", &c("two_sorted_set")]),
        strings(&["imaginaries", &c("cycle_k2")]),
        strings(&["subgroups", &c("cycle_k2"), "--arity", "2"]),
        strings(&["essential", &c("cycle_k2")]),
        strings(&["wei", &c("two_classes")]),
        strings(&["fingerprint", &c("cycle_k2")]),
        strings(&["compare", &c("pure_set"), &c("dlo"), "--configuration-size", "3"]),
        strings(&["fragment", &c("pure_set"), "--size", "3"]),
        strings(&["inn-check", fragment.to_str().unwrap(), auto.to_str().unwrap(), "--depth", "6"]),
        strings(&["--check-amalgamation", "3", "wu", "verify", "--samples", "200"]),
    ]
}

fn json_report(args: &[String], env: &[(&str, String)]) -> Result<(String, Report), String> {
    let args: Vec<String> = args.iter().cloned().chain(strings(&["--output", "json"])).collect();
    let o = oligo(&args, env);
    if o.status.code() == Some(1) {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let text = String::from_utf8(o.stdout).unwrap();
    let report = Report::from_json(&text).map_err(|e| format!("{args:?}: {e}"))?;
    Ok((text, report))
}

fn config(seed: u64, cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Rerunning from the recorded inputs, flags and caps alone gives the
/// same outcome, text and result.
pub fn provenance_replays() -> Result<(), String> {
    let calls = invocations();
    let strategy = (any::<Index>(), 7usize..=9);
    TestRunner::new(config(21, 20))
        .run(&strategy, |(which, bound)| {
            let args = &calls[which.index(calls.len())];
            let (_, first) = json_report(args, &[("OLIGO_COUNT_BOUND", bound.to_string())]).map_err(TestCaseError::fail)?;
            let paths: Vec<String> = first
                .provenance
                .inputs
                .iter()
                .enumerate()
                .map(|(i, input)| scratch(&format!("replay_input_{i}"), &input.text).display().to_string())
                .collect();
            let (_, second) = json_report(&first.replay_args(&paths), &[]).map_err(TestCaseError::fail)?;
            prop_assert_eq!(&first.outcome, &second.outcome, "{:?}", args);
            prop_assert_eq!(&first.text, &second.text, "{:?}", args);
            prop_assert_eq!(&first.result, &second.result, "{:?}", args);
            prop_assert_eq!(&first.provenance.caps, &second.provenance.caps, "{:?}", args);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The printed JSON parses to a report that prints identically, and typed
/// results convert back to the same value.
pub fn json_round_trips() -> Result<(), String> {
    for args in invocations() {
        let (text, report) = json_report(&args, &[])?;
        if report.to_json() != text.trim_end() {
            return Err(format!("{args:?}: reprinted JSON differs"));
        }
        let typed = match report.command.as_str() {
            "no-algebraicity" => report.result_as::<NoAlgebraicityReport>().map(|r| serde_json::to_value(r).unwrap()),
            "normalizer" => report.result_as::<InverseLimit>().map(|r| serde_json::to_value(r).unwrap()),
            "fingerprint" => report.result_as::<Fingerprint>().map(|r| serde_json::to_value(r).unwrap()),
            "essential" => report.result_as::<EssentialReport>().map(|r| serde_json::to_value(r).unwrap()),
            "wu verify" => report.result_as::<WuSuiteReport>().map(|r| serde_json::to_value(r).unwrap()),
            _ => continue,
        };
        match typed {
            Ok(value) if value == report.result => {}
            Ok(_) => return Err(format!("{args:?}: typed result changes on the way back")),
            Err(e) => return Err(format!("{args:?}: {e}")),
        }
    }
    Ok(())
}

pub fn suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("reports replay from their provenance", provenance_replays),
        ("JSON output round-trips", json_round_trips),
    ]
}
