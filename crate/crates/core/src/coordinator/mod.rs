//! End-to-end workflow: analyze, build R, hash, anchor, persist.
//!
//! The report file is written before the digest is submitted, so the anchored
//! digest always names bytes already on disk. The workflow completes once the
//! ledger has accepted (propagated) the transaction; confirmation is tracked
//! separately.

pub mod phases;
pub mod store;

use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use serde::Serialize;

use crate::analyzer::{Analyzer, AnalyzerError, TargetFixture};
use crate::digest::Digest;
use crate::ledger::{AccountId, Ledger, LedgerError, LedgerTx, TxStatus};
use crate::report::{self, AnalysisReport, ReportError};
pub use phases::build_report;
pub use store::{AnchorState, IndexEntry, Store, StoreError, StoreIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { attempts: 3, backoff: Duration::from_millis(500) }
    }
}

#[derive(Debug, Clone)]
pub struct WorkflowOptions {
    pub auditor: AccountId,
    pub retry: RetryPolicy,
}

impl WorkflowOptions {
    pub fn new(auditor: AccountId) -> Self {
        Self { auditor, retry: RetryPolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkflowResult {
    pub report: AnalysisReport,
    pub digest: Digest,
    pub tx: Option<LedgerTx>,
    pub anchor: AnchorState,
    /// Ledger clock (unix ms) at workflow start and completion.
    pub started_at: u64,
    pub completed_at: u64,
    pub report_path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkflowError {
    #[error("analysis failed: {0}")]
    Analysis(#[from] AnalyzerError),
    #[error("report assembly failed: {0}")]
    Report(#[from] ReportError),
    #[error(transparent)]
    Store(#[from] StoreError),
    /// The report was persisted, but anchoring failed.
    #[error("anchoring failed after {attempts} attempt(s): {error}")]
    Ledger { attempts: u32, error: LedgerError, result: Box<WorkflowResult> },
    /// The report was persisted, but the anchoring transaction reverted for
    /// a reason other than a duplicate.
    #[error("anchoring transaction reverted: {reason}")]
    Reverted { reason: String, result: Box<WorkflowResult> },
}

impl WorkflowError {
    /// The persisted result, when the failure happened after persistence.
    pub fn result(&self) -> Option<&WorkflowResult> {
        match self {
            WorkflowError::Ledger { result, .. } | WorkflowError::Reverted { result, .. } => Some(result),
            _ => None,
        }
    }
}

enum Failure {
    Ledger(u32, LedgerError),
    Reverted(String),
}

fn submit_with_retry<L: Ledger + ?Sized>(
    ledger: &L,
    digest: &Digest,
    options: &WorkflowOptions,
) -> Result<LedgerTx, (u32, LedgerError)> {
    let attempts = options.retry.attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        let outcome = ledger
            .submit_log(digest, &options.auditor)
            .and_then(|tx| if tx.status.is_final() { Ok(tx) } else { ledger.await_propagation(&tx.tx_id) });
        match outcome {
            Ok(tx) => return Ok(tx),
            Err(e) if e.is_retryable() && attempt < attempts => thread::sleep(options.retry.backoff),
            Err(e) => return Err((attempt, e)),
        }
    }
}

/// Run the five phases on `target`, anchor the report digest and persist it.
pub fn run_workflow<L: Ledger + ?Sized>(
    target: &TargetFixture,
    analyzer: &dyn Analyzer,
    ledger: &L,
    store: &Store,
    options: &WorkflowOptions,
) -> Result<WorkflowResult, WorkflowError> {
    let started_at = ledger.now_ms();
    let findings = analyzer.analyze(target)?;
    let report = build_report(target, analyzer.meta(), findings)?;
    let bytes = report::canonicalize(&report)?;
    let digest = Digest::of(&bytes);
    store.write_report(&bytes, &digest)?;

    let submitted = submit_with_retry(ledger, &digest, options);
    let completed_at = ledger.now_ms();
    let (tx, anchor, failure) = match submitted {
        Ok(tx) if tx.status.is_duplicate_revert() => {
            let entry = ledger.get_log(&digest).ok().flatten();
            (Some(tx), AnchorState::AlreadyAnchored { entry }, None)
        }
        Ok(tx) if matches!(tx.status, TxStatus::Reverted { .. }) => {
            let TxStatus::Reverted { reason } = &tx.status else { unreachable!() };
            let reason = reason.clone();
            let error = format!("transaction reverted: {reason}");
            (Some(tx), AnchorState::SubmitFailed { error }, Some(Failure::Reverted(reason)))
        }
        Ok(tx) => (Some(tx), AnchorState::Submitted, None),
        Err((attempts, error)) => {
            (None, AnchorState::SubmitFailed { error: error.to_string() }, Some(Failure::Ledger(attempts, error)))
        }
    };

    let entry = IndexEntry {
        digest,
        tx_id: tx.as_ref().map(|t| t.tx_id),
        tx: tx.clone(),
        anchor: anchor.clone(),
        file: store::report_file_name(&digest),
        indexed_at: completed_at,
    };
    let report_path = store.persist(report.report_id, &bytes, entry)?;
    let result =
        WorkflowResult { report, digest, tx, anchor, started_at, completed_at, report_path };
    match failure {
        Some(Failure::Ledger(attempts, error)) => {
            Err(WorkflowError::Ledger { attempts, error, result: Box::new(result) })
        }
        Some(Failure::Reverted(reason)) => Err(WorkflowError::Reverted { reason, result: Box::new(result) }),
        None => Ok(result),
    }
}
