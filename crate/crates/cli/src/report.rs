//! Machine-readable run reports.

use std::collections::BTreeMap;

use cselfdual_core::report::all_pass;
use cselfdual_core::CheckResult;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "cselfdual";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a command asserted, plus its artifacts.
///
/// Timings are only recorded on request, so that reports of identical runs
/// are byte-identical by default.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_digest: Option<String>,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub artifacts: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            tool: TOOL,
            version: VERSION,
            command,
            instance_digest: None,
            checks: Vec::new(),
            warnings: Vec::new(),
            artifacts: BTreeMap::new(),
            timings_ms: None,
            passed: true,
        }
    }

    pub fn with_instance(mut self, bytes: &[u8]) -> Self {
        self.instance_digest = Some(digest(bytes));
        self
    }

    pub fn check(&mut self, c: CheckResult) {
        self.checks.push(c);
        self.passed = all_pass(&self.checks);
    }

    pub fn artifact(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("artifacts serialize");
        self.artifacts.insert(key.to_owned(), v);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn timing(&mut self, key: &str, ms: f64) {
        self.timings_ms.get_or_insert_with(BTreeMap::new).insert(key.to_owned(), ms);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match (c.pass, c.asserted) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "INFO",
            };
            out.push_str(&format!("{tag} {} (residual {:.3e})\n", c.name, c.residual));
        }
        for w in &self.warnings {
            out.push_str(&format!("WARN {w}\n"));
        }
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A check that passes iff `ok`, with residual 0 or 1.
pub fn flag(name: &str, ok: bool) -> CheckResult {
    CheckResult::new(name, if ok { 0.0 } else { 1.0 }, 0.5)
}
