//! Local content-addressed artifact store.
//!
//! Layout: `index.json` plus one `<digest-hex>.report.json` per report holding
//! its canonical bytes. Every file is replaced by write-temp-then-rename, and
//! the index is only rewritten after the report file is in place.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::fsutil::write_atomic;
use crate::ledger::{LedgerTx, LogEntry, TxId};
use crate::report::ReportId;

pub const INDEX_FILE: &str = "index.json";
pub const REPORT_SUFFIX: &str = ".report.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("store index {path} is corrupt: {source}")]
    Index { path: PathBuf, source: serde_json::Error },
    #[error("report bytes hash to {actual}, not the recorded digest {expected}")]
    DigestMismatch { expected: Digest, actual: Digest },
    #[error("report {report_id} is already indexed under digest {existing}")]
    Conflict { report_id: ReportId, existing: Digest },
    #[error("report {0} is not in the store")]
    Unknown(ReportId),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

/// How the report's digest came to be on the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum AnchorState {
    /// This run's transaction carries the anchor.
    Submitted,
    /// The digest was already logged; the submission reverted as a duplicate.
    AlreadyAnchored { entry: Option<LogEntry> },
    /// Submission failed after retries.
    SubmitFailed { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexEntry {
    pub digest: Digest,
    pub tx_id: Option<TxId>,
    /// Snapshot of the anchoring transaction (timestamps in unix ms).
    pub tx: Option<LedgerTx>,
    pub anchor: AnchorState,
    /// File name relative to the store root.
    pub file: String,
    /// Ledger clock (unix ms) when the entry was written.
    pub indexed_at: u64,
}

pub type StoreIndex = BTreeMap<ReportId, IndexEntry>;

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    index_lock: Mutex<()>,
}

pub fn report_file_name(digest: &Digest) -> String {
    format!("{}{REPORT_SUFFIX}", digest.to_hex())
}

/// A persist that has written its report file and prepared the new index but
/// not yet renamed it into place. Dropping it without [`Staged::commit`]
/// discards the index change.
#[derive(Debug)]
pub struct Staged<'a> {
    store: &'a Store,
    _guard: MutexGuard<'a, ()>,
    tmp_index: Option<PathBuf>,
    report_path: PathBuf,
}

impl Staged<'_> {
    pub fn report_path(&self) -> &Path {
        &self.report_path
    }

    pub fn commit(mut self) -> Result<PathBuf, StoreError> {
        if let Some(tmp) = self.tmp_index.take() {
            let index = self.store.index_path();
            fs::rename(&tmp, &index).map_err(io_err(&index))?;
        }
        Ok(self.report_path.clone())
    }
}

impl Drop for Staged<'_> {
    fn drop(&mut self) {
        if let Some(tmp) = self.tmp_index.take() {
            let _ = fs::remove_file(tmp);
        }
    }
}

impl Store {
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self { root: root.to_owned(), index_lock: Mutex::new(()) })
    }

    /// Handle on `root` without creating it; reads of a missing store see
    /// an empty index.
    pub fn at(root: &Path) -> Self {
        Self { root: root.to_owned(), index_lock: Mutex::new(()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index_path(&self) -> PathBuf {
        self.root.join(INDEX_FILE)
    }

    pub fn path_of(&self, entry: &IndexEntry) -> PathBuf {
        self.root.join(&entry.file)
    }

    pub fn index(&self) -> Result<StoreIndex, StoreError> {
        let path = self.index_path();
        match fs::read(&path) {
            Ok(bytes) => {
                serde_json::from_slice(&bytes).map_err(|source| StoreError::Index { path, source })
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(StoreIndex::new()),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }

    pub fn entry(&self, id: &ReportId) -> Result<IndexEntry, StoreError> {
        self.index()?.remove(id).ok_or(StoreError::Unknown(*id))
    }

    pub fn read_report(&self, entry: &IndexEntry) -> Result<Vec<u8>, StoreError> {
        let path = self.path_of(entry);
        fs::read(&path).map_err(io_err(&path))
    }

    fn lock(&self) -> MutexGuard<'_, ()> {
        self.index_lock.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Write the report file only. Used before anchoring so the submitted
    /// digest always matches bytes already on disk.
    pub fn write_report(&self, bytes: &[u8], digest: &Digest) -> Result<PathBuf, StoreError> {
        let actual = Digest::of(bytes);
        if actual != *digest {
            return Err(StoreError::DigestMismatch { expected: *digest, actual });
        }
        let path = self.root.join(report_file_name(digest));
        if fs::read(&path).ok().as_deref() != Some(bytes) {
            write_atomic(&path, bytes).map_err(io_err(&path))?;
        }
        Ok(path)
    }

    /// Write the report file and stage the index update.
    ///
    /// An existing entry for the same report and digest is left untouched
    /// unless its anchor previously failed and this one did not.
    pub fn stage(
        &self,
        report_id: ReportId,
        bytes: &[u8],
        entry: IndexEntry,
    ) -> Result<Staged<'_>, StoreError> {
        let report_path = self.write_report(bytes, &entry.digest)?;
        let guard = self.lock();
        let mut index = self.index()?;
        let replace = match index.get(&report_id) {
            None => true,
            Some(old) if old.digest != entry.digest => {
                return Err(StoreError::Conflict { report_id, existing: old.digest })
            }
            Some(old) => {
                matches!(old.anchor, AnchorState::SubmitFailed { .. })
                    && !matches!(entry.anchor, AnchorState::SubmitFailed { .. })
            }
        };
        let tmp_index = if replace {
            index.insert(report_id, entry);
            let tmp = self.root.join(format!(".{INDEX_FILE}.{}.staged", std::process::id()));
            let bytes = serde_json::to_vec_pretty(&index).expect("index serializes");
            fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
            fs::File::open(&tmp).and_then(|f| f.sync_all()).map_err(io_err(&tmp))?;
            Some(tmp)
        } else {
            None
        };
        Ok(Staged { store: self, _guard: guard, tmp_index, report_path })
    }

    pub fn persist(
        &self,
        report_id: ReportId,
        bytes: &[u8],
        entry: IndexEntry,
    ) -> Result<PathBuf, StoreError> {
        self.stage(report_id, bytes, entry)?.commit()
    }

    /// Replace the transaction snapshot of an existing entry.
    pub fn update_tx(&self, report_id: &ReportId, tx: LedgerTx) -> Result<(), StoreError> {
        let _guard = self.lock();
        let mut index = self.index()?;
        let entry = index.get_mut(report_id).ok_or(StoreError::Unknown(*report_id))?;
        if entry.tx.as_ref() == Some(&tx) {
            return Ok(());
        }
        entry.tx_id = Some(tx.tx_id);
        entry.tx = Some(tx);
        let path = self.index_path();
        let bytes = serde_json::to_vec_pretty(&index).expect("index serializes");
        write_atomic(&path, &bytes).map_err(io_err(&path))
    }
}
