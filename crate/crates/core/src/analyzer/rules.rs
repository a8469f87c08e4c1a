//! Versioned rule table driving the reference analyzer.
//!
//! The table is a TOML document; `config/ruleset.toml` ships the default and
//! `docs/rules.md` describes each rule.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fixture::Signal;
use crate::report::VulnClass;

#[derive(Debug, thiserror::Error)]
pub enum RulesetError {
    #[error("reading ruleset {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed ruleset: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid ruleset: {0}")]
    Invalid(String),
}

/// Maps one endpoint signal to a finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalRule {
    pub signal: Signal,
    pub class: VulnClass,
    /// Tenths of a CVSS base score.
    pub severity: u8,
    /// Hundredths.
    pub confidence: u8,
    pub remediation: String,
}

/// Flags a function whose op list has an external call before a state write.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReentrancyRule {
    pub enabled: bool,
    pub severity: u8,
    pub confidence: u8,
    /// `{location}` is replaced with the function name.
    pub remediation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ruleset {
    pub version: String,
    pub signal_rules: Vec<SignalRule>,
    pub reentrancy: ReentrancyRule,
}

const DEFAULT_RULESET: &str = include_str!("../../../../config/ruleset.toml");

impl Default for Ruleset {
    fn default() -> Self {
        Self::from_toml(DEFAULT_RULESET).expect("shipped ruleset is valid")
    }
}

impl Ruleset {
    pub fn from_toml(text: &str) -> Result<Self, RulesetError> {
        let rules: Ruleset = toml::from_str(text)?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn load(path: &Path) -> Result<Self, RulesetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| RulesetError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), RulesetError> {
        let mut seen = HashSet::new();
        for rule in &self.signal_rules {
            if !seen.insert(rule.signal) {
                return Err(RulesetError::Invalid(format!("duplicate rule for {:?}", rule.signal)));
            }
            check_scores(rule.severity, rule.confidence)?;
        }
        check_scores(self.reentrancy.severity, self.reentrancy.confidence)
    }
}

fn check_scores(severity: u8, confidence: u8) -> Result<(), RulesetError> {
    if severity > 100 || confidence > 100 {
        return Err(RulesetError::Invalid(format!(
            "severity {severity} / confidence {confidence} out of range"
        )));
    }
    Ok(())
}
