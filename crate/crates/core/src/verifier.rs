//! Integrity verification: recompute the digest of the exact bytes on disk
//! and compare with the ledger.
//!
//! Verification never writes to the store or the ledger.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::coordinator::{Store, StoreError};
use crate::digest::Digest;
use crate::ledger::{Ledger, LedgerError, LogEntry};
use crate::report::{self, ReportId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum VerdictState {
    /// The bytes hash to a digest that is logged on the ledger.
    Intact { digest: Digest, entry: LogEntry },
    /// The bytes do not match the recorded digest, or are not a valid
    /// canonical report. `expected` is absent when no digest was claimed.
    Tampered { expected: Option<Digest>, actual: Digest, reason: String },
    /// Well-formed report whose digest is not on the ledger.
    NotLogged { digest: Digest },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub state: VerdictState,
    /// Ledger clock, unix ms.
    pub checked_at: u64,
    /// Wall-clock durations of the ledger read and the local hash.
    pub retrieval_ms: f64,
    pub recompute_ms: f64,
}

impl Verdict {
    pub fn is_intact(&self) -> bool {
        matches!(self.state, VerdictState::Intact { .. })
    }

    pub fn is_tampered(&self) -> bool {
        matches!(self.state, VerdictState::Tampered { .. })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unverifiable: {0}")]
    Unverifiable(#[from] LedgerError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub mod exit {
    pub const INTACT: i32 = 0;
    pub const TAMPERED: i32 = 2;
    pub const NOT_LOGGED: i32 = 3;
    pub const UNVERIFIABLE: i32 = 4;
}

/// Verify `bytes` against the ledger and, if given, the digest a store
/// recorded for them.
pub fn verify<L: Ledger + ?Sized>(
    bytes: &[u8],
    expected: Option<&Digest>,
    ledger: &L,
) -> Result<Verdict, VerifyError> {
    let t = Instant::now();
    let actual = Digest::of(bytes);
    let recompute_ms = t.elapsed().as_secs_f64() * 1e3;
    let done = |state, retrieval_ms| Verdict { state, checked_at: ledger.now_ms(), retrieval_ms, recompute_ms };

    if let Some(expected) = expected.filter(|e| **e != actual) {
        let state = VerdictState::Tampered {
            expected: Some(*expected),
            actual,
            reason: "recomputed digest differs from the recorded digest".into(),
        };
        return Ok(done(state, 0.0));
    }
    if let Err(e) = report::parse_canonical(bytes) {
        let state = VerdictState::Tampered { expected: None, actual, reason: e.to_string() };
        return Ok(done(state, 0.0));
    }

    let t = Instant::now();
    let entry = ledger.get_log(&actual)?;
    let retrieval_ms = t.elapsed().as_secs_f64() * 1e3;
    let state = match entry {
        Some(entry) => VerdictState::Intact { digest: actual, entry },
        None => VerdictState::NotLogged { digest: actual },
    };
    Ok(done(state, retrieval_ms))
}

pub fn verify_file<L: Ledger + ?Sized>(
    path: &Path,
    expected: Option<&Digest>,
    ledger: &L,
) -> Result<Verdict, VerifyError> {
    let bytes = fs::read(path).map_err(|source| VerifyError::Io { path: path.to_owned(), source })?;
    verify(&bytes, expected, ledger)
}

pub type StoreVerdicts = Vec<(ReportId, Result<Verdict, VerifyError>)>;

/// One verdict per index entry, ordered by report id. A failing entry does not
/// stop the sweep.
pub fn verify_store<L: Ledger + ?Sized>(
    store: &Store,
    ledger: &L,
) -> Result<StoreVerdicts, VerifyError> {
    let index = store.index()?;
    Ok(index
        .into_iter()
        .map(|(id, entry)| (id, verify_file(&store.path_of(&entry), Some(&entry.digest), ledger)))
        .collect())
}

/// Process exit code for a set of outcomes: any tampering wins, then any
/// failure to verify, then any missing anchor.
pub fn exit_code<'a>(outcomes: impl IntoIterator<Item = &'a Result<Verdict, VerifyError>>) -> i32 {
    let (mut tampered, mut failed, mut missing) = (false, false, false);
    for o in outcomes {
        match o {
            Ok(v) => match v.state {
                VerdictState::Tampered { .. } => tampered = true,
                VerdictState::NotLogged { .. } => missing = true,
                VerdictState::Intact { .. } => {}
            },
            Err(_) => failed = true,
        }
    }
    if tampered {
        exit::TAMPERED
    } else if failed {
        exit::UNVERIFIABLE
    } else if missing {
        exit::NOT_LOGGED
    } else {
        exit::INTACT
    }
}
