//! Analysis engines.
//!
//! [`Analyzer`] is the pluggable engine interface. [`ReferenceAnalyzer`] is a
//! deterministic rule engine over fixture targets: endpoint signals map to
//! findings through the [`Ruleset`], and contract functions are checked for an
//! external call that precedes a state write.

pub mod corpus;
pub mod fixture;
pub mod metrics;
pub mod rules;

use std::collections::HashSet;

pub use corpus::{Corpus, CorpusError, CorpusEntry};
pub use fixture::{
    ContractFunction, ContractIr, Endpoint, FixtureError, GroundTruth, Label, Op, Signal,
    TargetFixture, TargetKind,
};
pub use metrics::{score_detections, Counts, DetectionMetrics, MetricsError, Ratio};
pub use rules::{ReentrancyRule, Ruleset, RulesetError, SignalRule};

use crate::report::{AnalyzerMeta, Finding, VulnClass};

#[derive(Debug, thiserror::Error)]
pub enum AnalyzerError {
    #[error(transparent)]
    InvalidTarget(#[from] FixtureError),
    #[error("analysis failed: {0}")]
    Engine(String),
}

pub trait Analyzer: Send + Sync {
    fn meta(&self) -> AnalyzerMeta;

    fn analyze(&self, target: &TargetFixture) -> Result<Vec<Finding>, AnalyzerError>;
}

#[derive(Debug, Clone, Default)]
pub struct ReferenceAnalyzer {
    ruleset: Ruleset,
}

impl ReferenceAnalyzer {
    pub const NAME: &'static str = "anchorscan-reference";

    pub fn new(ruleset: Ruleset) -> Self {
        Self { ruleset }
    }

    pub fn ruleset(&self) -> &Ruleset {
        &self.ruleset
    }
}

impl Analyzer for ReferenceAnalyzer {
    fn meta(&self) -> AnalyzerMeta {
        AnalyzerMeta {
            name: Self::NAME.to_owned(),
            version: format!("{}+rules.{}", env!("CARGO_PKG_VERSION"), self.ruleset.version),
            // Rule evaluation does not sample; 0.2 is the configured engine
            // temperature carried into the report metadata.
            temperature: 2,
        }
    }

    fn analyze(&self, target: &TargetFixture) -> Result<Vec<Finding>, AnalyzerError> {
        target.validate()?;
        let mut findings = Vec::new();
        let mut seen: HashSet<(VulnClass, &str)> = HashSet::new();

        for endpoint in &target.endpoints {
            for rule in &self.ruleset.signal_rules {
                if endpoint.signals.contains(&rule.signal)
                    && seen.insert((rule.class, endpoint.path.as_str()))
                {
                    findings.push(Finding {
                        vuln_class: rule.class,
                        location: endpoint.path.clone(),
                        severity: rule.severity,
                        confidence: rule.confidence,
                        remediation: rule.remediation.clone(),
                    });
                }
            }
        }

        let rule = &self.ruleset.reentrancy;
        if let (true, Some(ir)) = (rule.enabled, &target.contract_ir) {
            for function in &ir.functions {
                if external_call_precedes_write(&function.ops) {
                    findings.push(Finding {
                        vuln_class: VulnClass::Reentrancy,
                        location: function.name.clone(),
                        severity: rule.severity,
                        confidence: rule.confidence,
                        remediation: rule.remediation.replace("{location}", &function.name),
                    });
                }
            }
        }
        Ok(findings)
    }
}

/// True when some `ExternalCall` occurs before some `StateWrite`.
pub fn external_call_precedes_write(ops: &[Op]) -> bool {
    let mut called = false;
    for op in ops {
        match op {
            Op::ExternalCall => called = true,
            Op::StateWrite(_) if called => return true,
            _ => {}
        }
    }
    false
}
