//! Shared report plumbing: every verification suite emits a flat list of
//! check records wrapped in a versioned JSON document.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub identity: String,
    pub detail: String,
    pub residual: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(suite: &str, identity: &str, detail: String, residual: f64, pass: bool) -> Self {
        Self { suite: suite.to_string(), identity: identity.to_string(), detail, residual, pass }
    }

    /// A record that passes exactly when `residual` vanishes.
    pub fn exact(suite: &str, identity: &str, detail: String, residual: f64) -> Self {
        Self::new(suite, identity, detail, residual, residual == 0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub params: serde_json::Value,
    pub checks: Vec<CheckRecord>,
    pub failures: usize,
}

impl Report {
    pub fn new(command: &str, params: serde_json::Value, checks: Vec<CheckRecord>) -> Self {
        let failures = checks.iter().filter(|c| !c.pass).count();
        Self { schema_version: SCHEMA_VERSION, command: command.to_string(), params, checks, failures }
    }

    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.pass)
    }
}
