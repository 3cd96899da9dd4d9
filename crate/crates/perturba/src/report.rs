//! Structured check results and machine-readable run reports.
//!
//! Every verification entry point reduces to a list of [`Check`]s: a name, a
//! pass/fail flag, and (when meaningful) a residual magnitude. The CLI turns
//! these into a JSON report plus one human-readable line per check. Reports
//! are deterministic for a fixed seed, except for the `generated_at` stamp.

use serde::Serialize;
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), ok: true, residual: None, detail: None }
    }

    pub fn fail(name: impl Into<String>) -> Self {
        Check { name: name.into(), ok: false, residual: None, detail: None }
    }

    pub fn residual(name: impl Into<String>, residual: f64, ok: bool) -> Self {
        Check { name: name.into(), ok, residual: Some(residual), detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// "pass name (residual 1.2e-17)" / "FAIL name: ..." line for stdout.
    pub fn human_line(&self) -> String {
        let status = if self.ok { "pass" } else { "FAIL" };
        let mut line = format!("{status}  {}", self.name);
        if let Some(r) = self.residual {
            line.push_str(&format!("  (residual {r:.3e})"));
        }
        if let Some(d) = &self.detail {
            line.push_str(&format!("  [{d}]"));
        }
        line
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub scalar: String,
    pub seed: u64,
    pub status: String,
    pub generated_at: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: impl Into<String>, scalar: impl Into<String>, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            scalar: scalar.into(),
            seed,
            status: "pass".into(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.ok {
            self.status = "fail".into();
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "pass"
    }

    pub fn to_json(&self) -> String {
        // serde_json preserves struct field order, so output is reproducible.
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}
