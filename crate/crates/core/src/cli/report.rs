use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::symmetry::PointGenerator;

pub const ENGINE_VERSION: &str = concat!("symmflow ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub item: String,
    pub check: String,
    pub passed: bool,
}

/// Deterministic JSON report of one command run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub problem: String,
    pub inputs_digest: String,
    pub engine_version: String,
    pub outputs: Value,
    pub audit: Vec<AuditEntry>,
}

impl RunReport {
    pub fn verified(&self) -> bool {
        self.audit.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Default)]
pub(crate) struct Audit(pub Vec<AuditEntry>);

impl Audit {
    pub fn record(&mut self, item: impl Into<String>, check: impl Into<String>, passed: bool) {
        self.0.push(AuditEntry {
            item: item.into(),
            check: check.into(),
            passed,
        });
    }
}

pub(crate) fn point_json(g: &PointGenerator) -> Value {
    serde_json::json!({
        "xi0": g.xi0.to_string(),
        "eta0": g.eta0.to_string(),
        "xi1": g.xi1.to_string(),
        "eta1": g.eta1.to_string(),
        "field": g.field_string(),
    })
}

pub(crate) fn exact_json(g: &PointGenerator) -> Value {
    serde_json::json!({
        "xi": g.xi0.to_string(),
        "eta": g.eta0.to_string(),
    })
}
