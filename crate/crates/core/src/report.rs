use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Outcome of one named numerical check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
    /// Informational checks are reported but never fail a run.
    pub asserted: bool,
    pub witness: Option<Vec<usize>>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            pass: residual <= tol,
            asserted: true,
            witness: None,
        }
    }

    pub fn informational(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn with_witness(mut self, witness: Vec<usize>) -> Self {
        self.witness = Some(witness);
        self
    }

    /// Failed and asserted.
    pub fn is_failure(&self) -> bool {
        self.asserted && !self.pass
    }
}

pub fn all_pass(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| !c.is_failure())
}
