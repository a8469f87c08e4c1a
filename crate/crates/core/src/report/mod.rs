//! The analysis report artifact, its canonical byte form, and its digest.
//!
//! A report's digest is SHA-256 over [`canonicalize`]. Every numeric field is
//! an integer (fixed-point where a fraction is meant) so the canonical form
//! never has to format a float.

pub mod canonical;

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::digest::Digest;
pub use canonical::CanonicalError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("phase artifacts must list the five phases in order, found {found:?}")]
    Phases { found: Vec<Phase> },
    #[error("finding {index}: location is empty")]
    EmptyLocation { index: usize },
    #[error("finding {index}: severity {value} exceeds 100 tenths")]
    Severity { index: usize, value: u8 },
    #[error("finding {index}: confidence {value} exceeds 100 hundredths")]
    Confidence { index: usize, value: u8 },
    #[error("analyzer temperature {0} tenths is outside 0..=20")]
    Temperature(u8),
    #[error("created_at must be positive")]
    CreatedAt,
    #[error("malformed report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("report bytes are not in canonical form")]
    NonCanonical,
}

/// 128-bit report identifier, serialized as 32 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReportId([u8; 16]);

impl ReportId {
    pub const fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Display for ReportId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for ReportId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReportId({self})")
    }
}

impl FromStr for ReportId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(format!("report id must be 32 lowercase hex chars: {s:?}"));
        }
        let mut out = [0u8; 16];
        hex::decode_to_slice(s, &mut out).map_err(|e| e.to_string())?;
        Ok(Self(out))
    }
}

impl Serialize for ReportId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ReportId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(de::Error::custom)
    }
}

/// Workflow phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ReconScope,
    Discovery,
    AttackSurface,
    Exploitation,
    Reporting,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::ReconScope,
        Phase::Discovery,
        Phase::AttackSurface,
        Phase::Exploitation,
        Phase::Reporting,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseArtifact {
    pub phase: Phase,
    /// SHA-256 over the phase's raw artifact bytes.
    pub artifact_digest: Digest,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VulnClass {
    Reentrancy,
    Xss,
    Sqli,
    Idor,
    InfoDisclosure,
    Other,
}

impl VulnClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            VulnClass::Reentrancy => "reentrancy",
            VulnClass::Xss => "xss",
            VulnClass::Sqli => "sqli",
            VulnClass::Idor => "idor",
            VulnClass::InfoDisclosure => "info_disclosure",
            VulnClass::Other => "other",
        }
    }
}

impl fmt::Display for VulnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Finding {
    pub vuln_class: VulnClass,
    /// Endpoint path or contract function name.
    pub location: String,
    /// CVSS base score in tenths (0..=100).
    pub severity: u8,
    /// Confidence in hundredths (0..=100).
    pub confidence: u8,
    pub remediation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerMeta {
    pub name: String,
    pub version: String,
    /// Sampling temperature in tenths (0..=20).
    pub temperature: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub report_id: ReportId,
    pub target_ref: String,
    pub phase_artifacts: Vec<PhaseArtifact>,
    pub findings: Vec<Finding>,
    pub analyzer_meta: AnalyzerMeta,
    /// Unix seconds.
    pub created_at: u64,
    pub schema_version: u32,
}

impl AnalysisReport {
    pub fn validate(&self) -> Result<(), ReportError> {
        let phases: Vec<Phase> = self.phase_artifacts.iter().map(|a| a.phase).collect();
        if phases != Phase::ALL {
            return Err(ReportError::Phases { found: phases });
        }
        for (index, f) in self.findings.iter().enumerate() {
            if f.location.is_empty() {
                return Err(ReportError::EmptyLocation { index });
            }
            if f.severity > 100 {
                return Err(ReportError::Severity { index, value: f.severity });
            }
            if f.confidence > 100 {
                return Err(ReportError::Confidence { index, value: f.confidence });
            }
        }
        if self.analyzer_meta.temperature > 20 {
            return Err(ReportError::Temperature(self.analyzer_meta.temperature));
        }
        if self.created_at == 0 {
            return Err(ReportError::CreatedAt);
        }
        Ok(())
    }
}

/// Canonical byte encoding of a valid report.
pub fn canonicalize(report: &AnalysisReport) -> Result<Vec<u8>, ReportError> {
    report.validate()?;
    let value = serde_json::to_value(report)?;
    Ok(canonical::to_canonical_bytes(&value)?)
}

/// SHA-256 over the canonical encoding.
pub fn hash_report(report: &AnalysisReport) -> Result<Digest, ReportError> {
    Ok(Digest::of(&canonicalize(report)?))
}

/// Parse report JSON (canonical or not) and check invariants.
pub fn parse(bytes: &[u8]) -> Result<AnalysisReport, ReportError> {
    let report: AnalysisReport = serde_json::from_slice(bytes)?;
    report.validate()?;
    Ok(report)
}

/// Parse and additionally require that `bytes` is exactly the canonical form.
pub fn parse_canonical(bytes: &[u8]) -> Result<AnalysisReport, ReportError> {
    let report = parse(bytes)?;
    if canonicalize(&report)? != bytes {
        return Err(ReportError::NonCanonical);
    }
    Ok(report)
}
