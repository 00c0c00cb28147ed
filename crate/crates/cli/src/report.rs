use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use oligo_core::Verdict;

/// How a command ended, which fixes the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Fail => 2,
            Outcome::Inconclusive => 3,
        }
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Outcome {
        match v {
            Verdict::Pass => Outcome::Success,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    pub path: String,
    /// The presentation as re-written after parsing, enough to rerun.
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub module: String,
    pub inputs: Vec<Input>,
    pub flags: BTreeMap<String, String>,
    pub caps: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub outcome: Outcome,
    pub text: String,
    pub result: serde_json::Value,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }

    /// Command-line arguments that rerun this report with every cap pinned,
    /// reading the inputs from `paths` (one per recorded input).
    pub fn replay_args(&self, paths: &[String]) -> Vec<String> {
        let mut args: Vec<String> = self.command.split(' ').map(String::from).collect();
        args.extend(paths.iter().cloned());
        let option = |name: &str| format!("--{}", name.replace('_', "-"));
        for (name, value) in &self.provenance.flags {
            match value.as_str() {
                "true" => args.push(option(name)),
                "false" => {}
                _ => args.extend([option(name), value.clone()]),
            }
        }
        for (name, value) in &self.provenance.caps {
            args.extend([option(name), value.to_string()]);
        }
        args
    }

    /// The typed result, read back from the structured mirror.
    pub fn result_as<T: serde::de::DeserializeOwned>(&self) -> serde_json::Result<T> {
        serde_json::from_value(self.result.clone())
    }
}
