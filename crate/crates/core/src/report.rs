//! Validation reports: every violated rule with a witness tuple.

use std::fmt;

use serde::Serialize;

/// One failed instance of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Stable rule tag, e.g. `groupoid.associativity`.
    pub rule: &'static str,
    /// Ids of the elements exhibiting the failure, in the order the rule names them.
    pub witness: Vec<String>,
    pub message: String,
}

/// Result of running a validator: the list of all violations, not just the first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub violations: Vec<Violation>,
    /// Derived checks that must hold whenever the primary rules hold.
    /// Kept apart so a failure here points at a validator bug, not at the input.
    pub derived: Vec<Violation>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport {
            subject: subject.into(),
            ..Default::default()
        }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.derived.is_empty()
    }

    pub fn push(&mut self, rule: &'static str, witness: Vec<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            witness,
            message: message.into(),
        });
    }

    pub fn push_derived(
        &mut self,
        rule: &'static str,
        witness: Vec<String>,
        message: impl Into<String>,
    ) {
        self.derived.push(Violation {
            rule,
            witness,
            message: message.into(),
        });
    }

    /// Appends another report's findings, prefixing nothing.
    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.derived.extend(other.derived);
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().chain(&self.derived).any(|v| v.rule == rule)
    }

    pub fn violations_of<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().chain(&self.derived).filter(move |v| v.rule == rule)
    }

    /// Converts into `Ok(())` or the list of violations.
    pub fn into_result(self) -> crate::Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let subject = self.subject.clone();
            Err(crate::Error::invalid(subject, self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "{}: ok", self.subject);
        }
        writeln!(
            f,
            "{}: {} violation(s)",
            self.subject,
            self.violations.len() + self.derived.len()
        )?;
        for v in self.violations.iter().chain(&self.derived) {
            writeln!(f, "  [{}] ({}) {}", v.rule, v.witness.join(", "), v.message)?;
        }
        Ok(())
    }
}

/// Shorthand for building witness vectors from anything string-like.
#[macro_export]
#[doc(hidden)]
macro_rules! witness {
    ($($e:expr),* $(,)?) => {
        vec![$(::std::string::ToString::to_string(&$e)),*]
    };
}
