//! Ledger backends for anchoring report digests.
//!
//! Every backend enforces the same write-once log contract: the first
//! successful `submit_log` for a digest stores a [`LogEntry`]; any later
//! submission of that digest reverts with [`REVERT_DUPLICATE`].
//!
//! - [`sim::SimLedger`] runs the contract on a deterministic virtual-time chain.
//! - [`rpc::RpcLedger`] drives the deployed contract over EVM JSON-RPC.

pub mod contract;
pub mod rpc;
pub mod sampling;
pub mod sim;

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::digest::Digest;

pub use contract::{LogContract, LogMinted};
pub use sampling::TruncatedNormal;
pub use sim::{ChainConfig, LifecycleEvent, SimChain, SimLedger};

/// Revert reason of a duplicate submission.
pub const REVERT_DUPLICATE: &str = "Hash already exists";

fn parse_prefixed_hex<const N: usize>(s: &str) -> Result<[u8; N], String> {
    let body = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    let mut out = [0u8; N];
    hex::decode_to_slice(body, &mut out)
        .map_err(|e| format!("expected {N} hex bytes in {s:?}: {e}"))?;
    Ok(out)
}

/// 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AccountId(pub [u8; 20]);

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AccountId({self})")
    }
}

impl FromStr for AccountId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_prefixed_hex(s).map(Self)
    }
}

/// 32-byte transaction id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TxId(pub [u8; 32]);

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TxId({self})")
    }
}

impl FromStr for TxId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_prefixed_hex(s).map(Self)
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                String::deserialize(deserializer)?.parse().map_err(de::Error::custom)
            }
        }
    };
}

string_serde!(AccountId);
string_serde!(TxId);

/// Stored record for an anchored digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub report_hash: Digest,
    /// Block time, unix seconds. Never zero for a stored entry.
    pub timestamp: u64,
    pub auditor: AccountId,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TxStatus {
    Pending,
    Propagated,
    Confirmed,
    Reverted { reason: String },
}

impl TxStatus {
    pub fn is_final(&self) -> bool {
        matches!(self, TxStatus::Confirmed | TxStatus::Reverted { .. })
    }

    pub fn is_duplicate_revert(&self) -> bool {
        matches!(self, TxStatus::Reverted { reason } if reason == REVERT_DUPLICATE)
    }
}

impl fmt::Display for TxStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TxStatus::Pending => f.write_str("pending"),
            TxStatus::Propagated => f.write_str("propagated"),
            TxStatus::Confirmed => f.write_str("confirmed"),
            TxStatus::Reverted { reason } => write!(f, "reverted ({reason})"),
        }
    }
}

/// An anchoring transaction. Timestamps are unix milliseconds and are
/// monotone in lifecycle order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTx {
    pub tx_id: TxId,
    pub payload_hash: Digest,
    pub auditor: AccountId,
    pub submitted_at: Option<u64>,
    pub propagated_at: Option<u64>,
    pub confirmed_at: Option<u64>,
    pub status: TxStatus,
}

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    /// Network-level failure; the request may be retried.
    #[error("ledger transport error: {0}")]
    Transport(String),
    #[error("ledger rpc error {code}: {message}")]
    Rpc { code: i64, message: String, data: Option<String> },
    #[error("unknown transaction {0}")]
    UnknownTx(TxId),
    #[error("auditor {requested} is not the signing account {signer}")]
    AuditorMismatch { requested: AccountId, signer: AccountId },
    #[error("invalid ledger configuration: {0}")]
    Config(String),
    #[error("malformed ledger response: {0}")]
    Decode(String),
}

impl LedgerError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LedgerError::Transport(_))
    }
}

/// Backend-neutral view of the log contract. Implementations accept
/// concurrent callers.
pub trait Ledger: Send + Sync {
    /// Submit `hash` for anchoring on behalf of `auditor`. A submission that
    /// is certain to revert returns a transaction already in the reverted
    /// state instead of an error.
    fn submit_log(&self, hash: &Digest, auditor: &AccountId) -> Result<LedgerTx, LedgerError>;

    /// Block until the transaction has left `Pending` and return its state.
    fn await_propagation(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError>;

    /// Current state of a transaction this ledger handle has submitted.
    fn tx(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError>;

    /// The stored entry for `hash`, if any. Read-only.
    fn get_log(&self, hash: &Digest) -> Result<Option<LogEntry>, LedgerError>;

    /// Ledger clock in unix milliseconds (virtual for the simulator).
    fn now_ms(&self) -> u64;
}

impl<L: Ledger + ?Sized> Ledger for &L {
    fn submit_log(&self, hash: &Digest, auditor: &AccountId) -> Result<LedgerTx, LedgerError> {
        (**self).submit_log(hash, auditor)
    }
    fn await_propagation(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        (**self).await_propagation(tx_id)
    }
    fn tx(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        (**self).tx(tx_id)
    }
    fn get_log(&self, hash: &Digest) -> Result<Option<LogEntry>, LedgerError> {
        (**self).get_log(hash)
    }
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn account_and_tx_ids_round_trip() {
        let a: AccountId = "0x00000000000000000000000000000000000000aB".parse().unwrap();
        assert_eq!(a.to_string(), "0x00000000000000000000000000000000000000ab");
        assert!("0x1234".parse::<AccountId>().is_err());
        let t = TxId([0xab; 32]);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<TxId>(&json).unwrap(), t);
    }

    #[test]
    fn status_serde_shape() {
        let s = TxStatus::Reverted { reason: REVERT_DUPLICATE.into() };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"state":"reverted","reason":"Hash already exists"}"#
        );
        assert!(s.is_duplicate_revert() && s.is_final());
        assert!(!TxStatus::Propagated.is_final());
    }
}
