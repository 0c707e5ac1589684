//! Command reports: human text on stdout, canonical JSON on request.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use gengauge::ValidationReport;

/// One failed instance of a check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    /// Which input or generated instance failed.
    pub instance: String,
    pub rule: String,
    pub witness: Vec<String>,
    pub message: String,
}

/// A named check with the number of instances it ran on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub statement: String,
    pub instances: usize,
    pub violations: Vec<Finding>,
}

impl Check {
    pub fn new(id: &str, statement: &str) -> Self {
        Check {
            id: id.into(),
            statement: statement.into(),
            instances: 0,
            violations: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fail(&mut self, instance: impl Into<String>, rule: &str, witness: Vec<String>, message: impl Into<String>) {
        self.violations.push(Finding {
            instance: instance.into(),
            rule: rule.into(),
            witness,
            message: message.into(),
        });
    }

    /// Copies every violation of a validator report, derived ones included.
    pub fn absorb(&mut self, instance: &str, r: &ValidationReport) {
        for v in r.violations.iter().chain(&r.derived) {
            self.fail(instance, v.rule, v.witness.clone(), v.message.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub ok: bool,
    pub checks: Vec<Check>,
    /// Command-specific result (a division value, a count, …).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            ok: true,
            checks: Vec::new(),
            result: Value::Null,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.ok &= check.ok();
        self.checks.push(check);
    }

    /// One line per check, then its witnesses.
    pub fn render_checks(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.ok() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict} {} ({} instances): {}", c.id, c.instances, c.statement);
            for f in &c.violations {
                let _ = writeln!(
                    s,
                    "  {} [{}] {}: {} ({})",
                    c.id,
                    f.instance,
                    f.rule,
                    f.message,
                    f.witness.join(", ")
                );
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        crate::document::to_canonical_json(&serde_json::to_value(self).expect("reports serialize"))
    }
}
