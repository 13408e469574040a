use crate::Cli;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write;

#[derive(Debug, Serialize)]
pub struct Check {
    /// Qualified name: the entry label followed by the check name.
    pub name: String,
    pub pass: bool,
    pub record: Value,
}

#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub results: Vec<Value>,
    pub checks: Vec<Check>,
    /// Extra summary lines.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), ..Default::default() }
    }

    pub fn check<T: Serialize>(&mut self, context: &str, check: &str, pass: bool, record: &T) {
        let name = if context.is_empty() { check.to_string() } else { format!("{context}/{check}") };
        let record = serde_json::to_value(record).unwrap_or(Value::Null);
        self.checks.push(Check { name, pass, record });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.checks.iter().find(|c| !c.pass).map(|c| c.name.as_str())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for line in &self.notes {
            let _ = writeln!(s, "{line}");
        }
        let failed: Vec<&Check> = self.checks.iter().filter(|c| !c.pass).collect();
        for c in &failed {
            let _ = writeln!(s, "FAIL {}", c.name);
        }
        let _ = writeln!(
            s,
            "{}: {} checks, {} failed -> {}",
            self.command,
            self.checks.len(),
            failed.len(),
            if failed.is_empty() { "PASS" } else { "FAIL" }
        );
        s
    }

    pub fn to_json(&self, cli: &Cli) -> String {
        let doc = json!({
            "command": self.command,
            "config": cli,
            "seed": cli.common.seed,
            "pass": self.first_failure().is_none(),
            "results": self.results,
            "checks": self.checks,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}
