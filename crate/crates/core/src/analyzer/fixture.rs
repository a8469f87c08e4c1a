//! Scan target fixtures and their ground-truth labels.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::report::VulnClass;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("malformed fixture JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("target {target}: {reason}")]
    Invalid { target: String, reason: String },
}

fn invalid(target: &str, reason: impl Into<String>) -> FixtureError {
    FixtureError::Invalid { target: target.to_owned(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    WebEndpointSet,
    SmartContract,
}

/// Observations recorded against a web endpoint. Unknown tags fail to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    ReflectsInput,
    SqlErrorOnQuote,
    SequentialIdAccess,
    VerboseStacktrace,
    DirectoryListing,
    MissingSecurityHeaders,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    pub path: String,
    #[serde(default)]
    pub signals: BTreeSet<Signal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    ExternalCall,
    StateWrite(String),
    StateRead(String),
    Require,
    Emit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractFunction {
    pub name: String,
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractIr {
    pub functions: Vec<ContractFunction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFixture {
    pub target_id: String,
    pub kind: TargetKind,
    /// Unix seconds at which the target snapshot was captured; becomes the
    /// report's `created_at`.
    pub captured_at: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoints: Vec<Endpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_ir: Option<ContractIr>,
}

impl TargetFixture {
    pub fn from_json(bytes: &[u8]) -> Result<Self, FixtureError> {
        let fixture: TargetFixture = serde_json::from_slice(bytes)?;
        fixture.validate()?;
        Ok(fixture)
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let id = &self.target_id;
        if id.is_empty() {
            return Err(invalid(id, "empty target_id"));
        }
        if self.captured_at == 0 {
            return Err(invalid(id, "captured_at must be positive"));
        }
        match self.kind {
            TargetKind::WebEndpointSet => {
                if self.contract_ir.is_some() {
                    return Err(invalid(id, "web target must not carry contract_ir"));
                }
                if self.endpoints.is_empty() {
                    return Err(invalid(id, "web target needs at least one endpoint"));
                }
                let mut seen = HashSet::new();
                for e in &self.endpoints {
                    if e.path.is_empty() {
                        return Err(invalid(id, "empty endpoint path"));
                    }
                    if !seen.insert(e.path.as_str()) {
                        return Err(invalid(id, format!("duplicate endpoint {}", e.path)));
                    }
                }
            }
            TargetKind::SmartContract => {
                if !self.endpoints.is_empty() {
                    return Err(invalid(id, "contract target must not carry endpoints"));
                }
                let Some(ir) = &self.contract_ir else {
                    return Err(invalid(id, "contract target needs contract_ir"));
                };
                if ir.functions.is_empty() {
                    return Err(invalid(id, "contract has no functions"));
                }
                let mut seen = HashSet::new();
                for f in &ir.functions {
                    if f.name.is_empty() {
                        return Err(invalid(id, "empty function name"));
                    }
                    if f.ops.is_empty() {
                        return Err(invalid(id, format!("function {} has no ops", f.name)));
                    }
                    if !seen.insert(f.name.as_str()) {
                        return Err(invalid(id, format!("duplicate function {}", f.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Endpoint paths or function names, in fixture order.
    pub fn locations(&self) -> Vec<&str> {
        match &self.contract_ir {
            Some(ir) => ir.functions.iter().map(|f| f.name.as_str()).collect(),
            None => self.endpoints.iter().map(|e| e.path.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub vuln_class: VulnClass,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub target_id: String,
    pub labels: BTreeSet<Label>,
}

impl GroundTruth {
    pub fn from_json(bytes: &[u8]) -> Result<Self, FixtureError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Every label must point at a location that exists in `fixture`.
    pub fn validate_against(&self, fixture: &TargetFixture) -> Result<(), FixtureError> {
        if self.target_id != fixture.target_id {
            return Err(invalid(
                &fixture.target_id,
                format!("ground truth is for {}", self.target_id),
            ));
        }
        let locations: HashSet<&str> = fixture.locations().into_iter().collect();
        for label in &self.labels {
            if !locations.contains(label.location.as_str()) {
                return Err(invalid(
                    &fixture.target_id,
                    format!("label location {} does not exist", label.location),
                ));
            }
        }
        Ok(())
    }
}
