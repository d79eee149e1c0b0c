//! Certification reports: per-clause pass/fail with worst margins and
//! witness points, serialized as schema-versioned JSON.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One certified clause: name, outcome, worst margin and where it occurred.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst-case margin; positive means the clause held with room.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, passed: bool, margin: f64) -> Check {
        Check { name: name.to_string(), passed, margin, witness: None, detail: None }
    }

    pub fn with_witness(mut self, w: &[f64]) -> Check {
        self.witness = Some(w.to_vec());
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Check {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CertificationReport {
    pub checks: Vec<Check>,
}

impl CertificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn merge(&mut self, other: CertificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Top-level report written by every CLI command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: serde_json::Value,
    pub constants: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, inputs: serde_json::Value) -> RunReport {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            constants: serde_json::Value::Object(Default::default()),
            checks: Vec::new(),
            passed: true,
            artifacts: Vec::new(),
        }
    }

    pub fn set_constant(&mut self, key: &str, value: serde_json::Value) {
        if let serde_json::Value::Object(map) = &mut self.constants {
            map.insert(key.to_string(), value);
        }
    }

    pub fn extend_checks(&mut self, report: &CertificationReport) {
        self.checks.extend(report.checks.iter().cloned());
        self.passed = self.passed && report.passed();
    }

    pub fn push_check(&mut self, check: Check) {
        self.passed = self.passed && check.passed;
        self.checks.push(check);
    }
}

/// Serialize a float with 17 significant digits (round-trip exact for f64).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_fail_logic() {
        let mut r = CertificationReport::new();
        r.push(Check::new("a", true, 0.5));
        assert!(r.passed());
        r.push(Check::new("b", false, -0.1).with_witness(&[1.0, 2.0]));
        assert!(!r.passed());
        assert_eq!(r.failures().len(), 1);
    }

    #[test]
    fn float_format_round_trips() {
        let x = std::f64::consts::PI * 1e-7;
        let s = format_float(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(x, back);
    }
}
