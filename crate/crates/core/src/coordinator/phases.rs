//! Raw per-phase artifacts and report assembly.
//!
//! Each phase produces a small JSON document; its canonical bytes are hashed
//! into the phase's `artifact_digest`, so altering any phase output changes
//! the report digest.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::analyzer::{Op, TargetFixture, TargetKind};
use crate::digest::Digest;
use crate::report::{
    self, canonical, AnalysisReport, AnalyzerMeta, Finding, Phase, PhaseArtifact, ReportError,
    ReportId, SCHEMA_VERSION,
};

/// Raw artifact produced by one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutput {
    pub phase: Phase,
    pub artifact: Value,
    pub summary: String,
}

impl PhaseOutput {
    pub fn bytes(&self) -> Result<Vec<u8>, ReportError> {
        Ok(canonical::to_canonical_bytes(&self.artifact)?)
    }

    pub fn to_artifact(&self) -> Result<PhaseArtifact, ReportError> {
        Ok(PhaseArtifact {
            phase: self.phase,
            artifact_digest: Digest::of(&self.bytes()?),
            summary: self.summary.clone(),
        })
    }
}

fn kind_str(kind: TargetKind) -> &'static str {
    match kind {
        TargetKind::WebEndpointSet => "web_endpoint_set",
        TargetKind::SmartContract => "smart_contract",
    }
}

pub fn recon_scope(target: &TargetFixture) -> PhaseOutput {
    let locations = target.locations();
    PhaseOutput {
        phase: Phase::ReconScope,
        artifact: json!({
            "target_id": target.target_id,
            "kind": kind_str(target.kind),
            "captured_at": target.captured_at,
            "location_count": locations.len(),
        }),
        summary: format!("{} in scope, {} locations", target.target_id, locations.len()),
    }
}

pub fn discovery(target: &TargetFixture) -> PhaseOutput {
    let locations = target.locations();
    PhaseOutput {
        phase: Phase::Discovery,
        artifact: json!({ "locations": locations }),
        summary: format!("{} locations enumerated", locations.len()),
    }
}

pub fn attack_surface(target: &TargetFixture) -> PhaseOutput {
    let mut surface = Vec::new();
    let mut exposed = 0usize;
    for e in &target.endpoints {
        if !e.signals.is_empty() {
            exposed += 1;
        }
        surface.push(json!({ "location": e.path, "signals": e.signals }));
    }
    if let Some(ir) = &target.contract_ir {
        for f in &ir.functions {
            let calls = f.ops.iter().filter(|op| matches!(op, Op::ExternalCall)).count();
            let writes: Vec<&str> = f
                .ops
                .iter()
                .filter_map(|op| match op {
                    Op::StateWrite(v) => Some(v.as_str()),
                    _ => None,
                })
                .collect();
            if calls > 0 {
                exposed += 1;
            }
            surface.push(json!({ "location": f.name, "external_calls": calls, "state_writes": writes }));
        }
    }
    PhaseOutput {
        phase: Phase::AttackSurface,
        artifact: json!({ "surface": surface }),
        summary: format!("{exposed} of {} locations show attack surface", surface.len()),
    }
}

pub fn exploitation(findings: &[Finding]) -> Result<PhaseOutput, ReportError> {
    Ok(PhaseOutput {
        phase: Phase::Exploitation,
        artifact: json!({ "findings": serde_json::to_value(findings)? }),
        summary: match findings.len() {
            1 => "1 finding".to_owned(),
            n => format!("{n} findings"),
        },
    })
}

pub fn reporting(findings: &[Finding]) -> PhaseOutput {
    let mut by_class: BTreeMap<&str, u64> = BTreeMap::new();
    for f in findings {
        *by_class.entry(f.vuln_class.as_str()).or_default() += 1;
    }
    let max_severity = findings.iter().map(|f| f.severity).max().unwrap_or(0);
    let summary = if by_class.is_empty() {
        "no findings".to_owned()
    } else {
        by_class.iter().map(|(c, n)| format!("{c}: {n}")).collect::<Vec<_>>().join(", ")
    };
    PhaseOutput {
        phase: Phase::Reporting,
        artifact: json!({ "by_class": by_class, "max_severity": max_severity }),
        summary,
    }
}

/// Assemble R for `target`. The report id is derived from the content (the
/// first 16 bytes of the digest of the report with a zero id), so identical
/// inputs give an identical report.
pub fn build_report(
    target: &TargetFixture,
    meta: AnalyzerMeta,
    findings: Vec<Finding>,
) -> Result<AnalysisReport, ReportError> {
    let outputs =
        [recon_scope(target), discovery(target), attack_surface(target), exploitation(&findings)?, reporting(&findings)];
    let phase_artifacts = outputs.iter().map(PhaseOutput::to_artifact).collect::<Result<Vec<_>, _>>()?;
    let mut report = AnalysisReport {
        report_id: ReportId::from_bytes([0; 16]),
        target_ref: target.target_id.clone(),
        phase_artifacts,
        findings,
        analyzer_meta: meta,
        created_at: target.captured_at,
        schema_version: SCHEMA_VERSION,
    };
    let seed = report::hash_report(&report)?;
    let mut id = [0u8; 16];
    id.copy_from_slice(&seed.as_bytes()[..16]);
    report.report_id = ReportId::from_bytes(id);
    Ok(report)
}
