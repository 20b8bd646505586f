//! `check`: validation → de Rham → ε-side → verdict for one spec file.

use gmdet_core::connection::{Admissibility, ConnectionSpec};
use gmdet_core::epsilon::verify_conjecture;
use gmdet_core::forms::FactorHints;
use serde_json::json;

use crate::input::load_spec;
use crate::report::{Outcome, ScenarioReport};

pub fn run_spec(report: &mut ScenarioReport, spec: &ConnectionSpec) {
    if spec.divisor().is_empty() {
        report.outcome = Outcome::InputError("empty_divisor: the pole divisor D must be nonempty".into());
        return;
    }
    if !spec.is_integrable() {
        report.outcome = Outcome::InputError("not_integrable".into());
        return;
    }
    if let Admissibility::NotAdmissible { point, reason } = spec.check_admissible() {
        report.outcome = Outcome::InputError(format!("not_admissible at {point}: {reason}"));
        return;
    }
    let res = report.timed("verify", || verify_conjecture(spec, &FactorHints::default()));
    match res {
        Ok(rep) => {
            report.outcome = Outcome::from(&rep.verdict);
            report.body = rep.to_json();
        }
        Err(e) => report.outcome = Outcome::InputError(e.to_string()),
    }
}

pub fn cmd_check(text: &str) -> ScenarioReport {
    let report = ScenarioReport::new("check", json!({ "spec": serde_json::from_str::<serde_json::Value>(text).ok() }));
    let spec = match load_spec(text) {
        Ok(s) => s,
        Err(e) => return report.fail_input(e),
    };
    let mut report = report;
    run_spec(&mut report, &spec);
    report
}
