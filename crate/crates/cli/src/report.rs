//! Scenario reports and exit codes.

use std::time::Instant;

use gmdet_core::epsilon::Verdict;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Verified,
    Refuted,
    CannotCertify(String),
    InputError(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::Refuted => 2,
            Outcome::CannotCertify(_) => 3,
            Outcome::InputError(_) => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Verified => "verified",
            Outcome::Refuted => "refuted",
            Outcome::CannotCertify(_) => "cannot_certify",
            Outcome::InputError(_) => "input_error",
        }
    }
}

impl From<&Verdict> for Outcome {
    fn from(v: &Verdict) -> Self {
        match v {
            Verdict::Verified => Outcome::Verified,
            Verdict::Refuted { .. } => Outcome::Refuted,
            Verdict::CannotCertify(r) => Outcome::CannotCertify(r.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub scenario: String,
    pub inputs: Value,
    pub outcome: Outcome,
    pub body: Value,
    pub timings: Vec<(String, f64)>,
}

impl ScenarioReport {
    pub fn new(scenario: &str, inputs: Value) -> Self {
        ScenarioReport { scenario: scenario.into(), inputs, outcome: Outcome::Verified, body: json!({}), timings: Vec::new() }
    }

    pub fn fail_input(mut self, msg: impl ToString) -> Self {
        self.outcome = Outcome::InputError(msg.to_string());
        self
    }

    /// Run `f`, recording its wall time under `label`.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((label.into(), start.elapsed().as_secs_f64()));
        out
    }

    /// Wall times are left out unless asked for, so exact scenarios give
    /// identical bytes on identical input.
    pub fn to_json(&self, with_timings: bool) -> Value {
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "inputs": self.inputs,
            "outcome": self.outcome.label(),
            "result": self.body,
        });
        match &self.outcome {
            Outcome::CannotCertify(r) | Outcome::InputError(r) => v["reason"] = json!(r),
            _ => {}
        }
        if with_timings {
            v["timings"] = self.timings.iter().map(|(k, t)| json!({ "step": k, "seconds": t })).collect();
        }
        v
    }
}
