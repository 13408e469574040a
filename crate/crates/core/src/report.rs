//! Machine-readable check records shared by the checking modules.

use serde::Serialize;
use serde_json::Value;

/// Outcome of comparing a computed value against a lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub check: String,
    pub inputs: Value,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub margin: f64,
}

impl BoundCheck {
    pub fn new(check: &str, inputs: Value, value: f64, bound: f64, pass: bool) -> Self {
        BoundCheck { check: check.to_string(), inputs, value, bound, pass, margin: value - bound }
    }
}

/// Outcome of an inequality `lhs <= rhs` (or an agreement test, where `lhs`
/// is the discrepancy and `rhs` the tolerance).
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conditional_flags: Vec<String>,
}

impl CheckRecord {
    /// Record for `lhs <= rhs`.
    pub fn at_most(check: &str, params: Value, lhs: f64, rhs: f64) -> Self {
        CheckRecord {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs,
            conditional_flags: Vec::new(),
        }
    }

    pub fn with_flags(mut self, flags: Vec<String>) -> Self {
        self.conditional_flags = flags;
        self
    }
}
