use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Outcome of any verifier: a verdict, an optional witness and counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub witness: Value,
    pub stats: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, ok: bool) -> Self {
        CheckReport {
            check: check.into(),
            verdict: Verdict::from_bool(ok),
            witness: Value::Null,
            stats: BTreeMap::new(),
        }
    }

    pub fn pass(check: impl Into<String>) -> Self {
        Self::new(check, true)
    }

    pub fn fail(check: impl Into<String>, witness: impl Serialize) -> Self {
        let mut r = Self::new(check, false);
        r.witness = serde_json::to_value(witness).unwrap_or(Value::Null);
        r
    }

    pub fn with_witness(mut self, witness: impl Serialize) -> Self {
        self.witness = serde_json::to_value(witness).unwrap_or(Value::Null);
        self
    }

    pub fn stat(mut self, key: &str, value: impl Serialize) -> Self {
        self.stats.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
