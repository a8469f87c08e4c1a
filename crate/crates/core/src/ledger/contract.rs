//! The write-once log contract as a plain state machine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AccountId, LogEntry, REVERT_DUPLICATE};
use crate::digest::Digest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMinted {
    pub report_hash: Digest,
    pub auditor: AccountId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogContract {
    logs: BTreeMap<Digest, LogEntry>,
    events: Vec<LogMinted>,
}

impl LogContract {
    /// The `require` guard, evaluated without touching state.
    pub fn check(&self, hash: &Digest) -> Result<(), &'static str> {
        match self.logs.get(hash) {
            Some(entry) if entry.timestamp != 0 => Err(REVERT_DUPLICATE),
            _ => Ok(()),
        }
    }

    /// Store an entry for `hash` and emit `LogMinted`, or revert if one exists.
    pub fn log_vulnerability_hash(
        &mut self,
        hash: Digest,
        sender: AccountId,
        block_timestamp: u64,
    ) -> Result<(), &'static str> {
        self.check(&hash)?;
        debug_assert!(block_timestamp > 0, "zero timestamp is the absent sentinel");
        self.logs.insert(
            hash,
            LogEntry { report_hash: hash, timestamp: block_timestamp, auditor: sender, verified: false },
        );
        self.events.push(LogMinted { report_hash: hash, auditor: sender });
        Ok(())
    }

    pub fn get_log(&self, hash: &Digest) -> Option<&LogEntry> {
        self.logs.get(hash).filter(|e| e.timestamp != 0)
    }

    pub fn events(&self) -> &[LogMinted] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.logs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logs.is_empty()
    }
}
