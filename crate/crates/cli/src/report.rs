use std::collections::BTreeMap;
use std::process::ExitCode;

use graphlhv::Exec;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "graphlhv.report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Violation,
}

#[derive(Serialize)]
struct Input {
    value: String,
    sha256: String,
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

/// The JSON envelope written to stdout. Holds nothing time- or
/// host-dependent, so equal inputs give byte-equal output.
#[derive(Serialize)]
pub struct Report {
    schema: &'static str,
    tool: Tool,
    command: Vec<String>,
    inputs: BTreeMap<&'static str, Input>,
    exec: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Value>,
    status: Outcome,
    result: Value,
}

impl Report {
    pub fn new() -> Self {
        Report {
            schema: SCHEMA,
            tool: Tool {
                name: "graphlhv",
                version: env!("CARGO_PKG_VERSION"),
            },
            command: std::env::args().skip(1).collect(),
            inputs: BTreeMap::new(),
            exec: "parallel",
            mode: None,
            status: Outcome::Ok,
            result: Value::Null,
        }
    }

    pub fn input(&mut self, name: &'static str, value: &str, bytes: &[u8]) {
        self.inputs.insert(
            name,
            Input {
                value: value.to_string(),
                sha256: hex::encode(Sha256::digest(bytes)),
            },
        );
    }

    pub fn mode(&mut self, mode: Value) {
        self.mode = Some(mode);
    }

    pub fn result(&mut self, result: Value) {
        self.result = result;
    }

    pub fn outcome(&mut self, outcome: Outcome) {
        self.status = outcome;
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = if exec.is_parallel() {
            "parallel"
        } else {
            "sequential"
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn exit_code(&self) -> ExitCode {
        match self.status {
            Outcome::Ok => ExitCode::SUCCESS,
            Outcome::Violation => ExitCode::from(1),
        }
    }
}
