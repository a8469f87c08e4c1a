//! Deterministic virtual-time chain running the log contract.
//!
//! Each submitted transaction draws its propagation and confirmation latency
//! from a generator seeded by `(rng_seed, tx_id)`, so the outcome of a
//! schedule does not depend on how concurrent callers interleave. The
//! lifecycle of a transaction is:
//!
//! 1. `Propagated` at `submitted_at + propagation`.
//! 2. Included in the first block strictly after propagation; the contract
//!    runs here and either stores the entry or reverts.
//! 3. `Confirmed` at the later of `inclusion + (confirmations - 1) * interval`
//!    and `propagated_at + confirmation`.
//!
//! Transitions are applied in `(deadline, tx_id)` order. Nothing moves until
//! the driver calls [`SimLedger::advance_time`] (or a helper built on it).

use std::collections::BTreeMap;
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::{
    AccountId, Ledger, LedgerError, LedgerTx, LogContract, LogEntry, LogMinted, TruncatedNormal,
    TxId, TxStatus,
};
use crate::digest::Digest;

/// 2025-01-01T00:00:00Z.
pub const DEFAULT_GENESIS_MS: u64 = 1_735_689_600_000;

fn default_genesis() -> u64 {
    DEFAULT_GENESIS_MS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub block_interval_ms: u64,
    pub confirmations_required: u32,
    pub propagation_ms: TruncatedNormal,
    pub confirmation_ms: TruncatedNormal,
    pub rng_seed: u64,
    #[serde(default = "default_genesis")]
    pub genesis_unix_ms: u64,
}

impl ChainConfig {
    /// Latencies measured against the Avalanche Fuji C-Chain testnet:
    /// propagation 2,180 ± 450 ms, confirmation 14,200 ± 1,800 ms.
    pub fn fuji() -> Self {
        Self {
            block_interval_ms: 2_000,
            confirmations_required: 1,
            propagation_ms: TruncatedNormal::new(2_180.0, 450.0),
            confirmation_ms: TruncatedNormal::new(14_200.0, 1_800.0),
            rng_seed: 0,
            genesis_unix_ms: DEFAULT_GENESIS_MS,
        }
    }

    /// No network latency; transactions still wait for the next block.
    pub fn instant() -> Self {
        Self {
            propagation_ms: TruncatedNormal::ZERO,
            confirmation_ms: TruncatedNormal::ZERO,
            ..Self::fuji()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let bad = |m: String| Err(LedgerError::Config(m));
        if self.block_interval_ms == 0 {
            return bad("block_interval_ms must be at least 1".into());
        }
        if self.confirmations_required == 0 {
            return bad("confirmations_required must be at least 1".into());
        }
        if self.genesis_unix_ms < 1_000 {
            return bad("genesis_unix_ms must be at least one second past the epoch".into());
        }
        self.propagation_ms.validate().map_err(|m| LedgerError::Config(format!("propagation: {m}")))?;
        self.confirmation_ms.validate().map_err(|m| LedgerError::Config(format!("confirmation: {m}")))
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self::fuji()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LifecycleEvent {
    Submitted { at: u64, tx_id: TxId, payload_hash: Digest, auditor: AccountId },
    Propagated { at: u64, tx_id: TxId },
    Included { at: u64, tx_id: TxId, block: u64 },
    LogMinted { at: u64, tx_id: TxId, report_hash: Digest, auditor: AccountId },
    Reverted { at: u64, tx_id: TxId, reason: String },
    Confirmed { at: u64, tx_id: TxId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Stage {
    Propagate,
    Include,
    Confirm,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SimTx {
    tx: LedgerTx,
    propagate_at: u64,
    include_at: u64,
    confirm_at: u64,
    stage: Stage,
}

impl SimTx {
    fn deadline(&self) -> Option<u64> {
        match self.stage {
            Stage::Propagate => Some(self.propagate_at),
            Stage::Include => Some(self.include_at),
            Stage::Confirm => Some(self.confirm_at),
            Stage::Done => None,
        }
    }
}

/// Full simulator state; serializable so a chain can be persisted between
/// processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimChain {
    config: ChainConfig,
    clock_ms: u64,
    contract: LogContract,
    txs: BTreeMap<TxId, SimTx>,
    trace: Vec<LifecycleEvent>,
}

impl SimChain {
    pub fn new(config: ChainConfig) -> Result<Self, LedgerError> {
        config.validate()?;
        Ok(Self {
            clock_ms: config.genesis_unix_ms,
            config,
            contract: LogContract::default(),
            txs: BTreeMap::new(),
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn now_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn contract(&self) -> &LogContract {
        &self.contract
    }

    /// Every lifecycle event since genesis, in application order.
    pub fn trace(&self) -> &[LifecycleEvent] {
        &self.trace
    }

    pub fn tx(&self, tx_id: &TxId) -> Option<&LedgerTx> {
        self.txs.get(tx_id).map(|t| &t.tx)
    }

    pub fn txs(&self) -> impl Iterator<Item = &LedgerTx> {
        self.txs.values().map(|t| &t.tx)
    }

    pub fn in_flight(&self) -> usize {
        self.txs.values().filter(|t| t.stage != Stage::Done).count()
    }

    fn tx_id_for(&self, hash: &Digest, auditor: &AccountId) -> TxId {
        let now = self.clock_ms;
        let dup = self
            .txs
            .values()
            .filter(|t| {
                t.tx.payload_hash == *hash && t.tx.auditor == *auditor && t.tx.submitted_at == Some(now)
            })
            .count() as u64;
        let mut h = Sha256::new();
        h.update(b"anchorscan/sim-tx/v1");
        h.update(hash.as_bytes());
        h.update(auditor.0);
        h.update(now.to_le_bytes());
        h.update(dup.to_le_bytes());
        TxId(h.finalize().into())
    }

    fn tx_rng(&self, tx_id: &TxId) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.config.rng_seed.to_le_bytes());
        h.update(tx_id.0);
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    fn next_block_after(&self, t: u64) -> u64 {
        let genesis = self.config.genesis_unix_ms;
        let interval = self.config.block_interval_ms;
        genesis + ((t - genesis) / interval + 1) * interval
    }

    pub fn submit_log(&mut self, hash: Digest, auditor: AccountId) -> LedgerTx {
        let now = self.clock_ms;
        let tx_id = self.tx_id_for(&hash, &auditor);
        let mut tx = LedgerTx {
            tx_id,
            payload_hash: hash,
            auditor,
            submitted_at: Some(now),
            propagated_at: None,
            confirmed_at: None,
            status: TxStatus::Pending,
        };
        self.trace.push(LifecycleEvent::Submitted { at: now, tx_id, payload_hash: hash, auditor });

        // Preflight against executed state, as a node's gas estimation would.
        if let Err(reason) = self.contract.check(&hash) {
            tx.status = TxStatus::Reverted { reason: reason.to_owned() };
            self.trace.push(LifecycleEvent::Reverted { at: now, tx_id, reason: reason.to_owned() });
            let sim = SimTx { tx: tx.clone(), propagate_at: now, include_at: now, confirm_at: now, stage: Stage::Done };
            self.txs.insert(tx_id, sim);
            return tx;
        }

        let mut rng = self.tx_rng(&tx_id);
        let propagation = self.config.propagation_ms.sample(&mut rng).round() as u64;
        let confirmation = self.config.confirmation_ms.sample(&mut rng).round() as u64;
        let propagate_at = now + propagation;
        // Same-sender transactions execute in submission order, as nonces
        // force on a real chain: never in or before a predecessor's block.
        let predecessor = self
            .txs
            .values()
            .filter(|t| t.tx.auditor == auditor && matches!(t.stage, Stage::Propagate | Stage::Include))
            .map(|t| t.include_at)
            .max();
        let include_at = match predecessor {
            Some(prev) => self.next_block_after(propagate_at.max(prev)),
            None => self.next_block_after(propagate_at),
        };
        let confirm_floor =
            include_at + u64::from(self.config.confirmations_required - 1) * self.config.block_interval_ms;
        let confirm_at = confirm_floor.max(propagate_at + confirmation);

        self.txs.insert(tx_id, SimTx { tx, propagate_at, include_at, confirm_at, stage: Stage::Propagate });
        let mut events = Vec::new();
        self.run_until(now, &mut events);
        self.txs[&tx_id].tx.clone()
    }

    fn next_due(&self, until: u64) -> Option<(u64, TxId)> {
        self.txs
            .iter()
            .filter_map(|(id, t)| t.deadline().map(|d| (d, *id)))
            .filter(|(d, _)| *d <= until)
            .min()
    }

    fn run_until(&mut self, until: u64, events: &mut Vec<LifecycleEvent>) {
        while let Some((at, tx_id)) = self.next_due(until) {
            self.clock_ms = self.clock_ms.max(at);
            let event = self.step(at, tx_id);
            events.extend(event);
        }
        self.clock_ms = self.clock_ms.max(until);
        self.trace.extend(events.iter().cloned());
    }

    fn step(&mut self, at: u64, tx_id: TxId) -> Vec<LifecycleEvent> {
        let genesis = self.config.genesis_unix_ms;
        let interval = self.config.block_interval_ms;
        let sim = self.txs.get_mut(&tx_id).expect("due tx exists");
        match sim.stage {
            Stage::Propagate => {
                sim.tx.propagated_at = Some(at);
                sim.tx.status = TxStatus::Propagated;
                sim.stage = Stage::Include;
                vec![LifecycleEvent::Propagated { at, tx_id }]
            }
            Stage::Include => {
                let block = (at - genesis) / interval;
                let (hash, auditor) = (sim.tx.payload_hash, sim.tx.auditor);
                let mut out = vec![LifecycleEvent::Included { at, tx_id, block }];
                match self.contract.log_vulnerability_hash(hash, auditor, at / 1_000) {
                    Ok(()) => {
                        sim.stage = Stage::Confirm;
                        out.push(LifecycleEvent::LogMinted { at, tx_id, report_hash: hash, auditor });
                    }
                    Err(reason) => {
                        sim.stage = Stage::Done;
                        sim.tx.status = TxStatus::Reverted { reason: reason.to_owned() };
                        out.push(LifecycleEvent::Reverted { at, tx_id, reason: reason.to_owned() });
                    }
                }
                out
            }
            Stage::Confirm => {
                sim.tx.confirmed_at = Some(at);
                sim.tx.status = TxStatus::Confirmed;
                sim.stage = Stage::Done;
                vec![LifecycleEvent::Confirmed { at, tx_id }]
            }
            Stage::Done => Vec::new(),
        }
    }

    /// Advance the virtual clock by `delta_ms`, applying due transitions.
    pub fn advance_time(&mut self, delta_ms: u64) -> Vec<LifecycleEvent> {
        let mut events = Vec::new();
        let until = self.clock_ms + delta_ms;
        self.run_until(until, &mut events);
        events
    }

    /// Advance the clock to `t` if it is in the future.
    pub fn advance_to(&mut self, t: u64) -> Vec<LifecycleEvent> {
        self.advance_time(t.saturating_sub(self.clock_ms))
    }

    /// Advance until every transaction has reached a final state.
    pub fn settle(&mut self) -> Vec<LifecycleEvent> {
        let mut events = Vec::new();
        while let Some(t) = self.txs.values().filter_map(SimTx::deadline).max() {
            events.extend(self.advance_to(t));
        }
        events
    }

    /// Advance until `tx_id` has left `Pending`.
    pub fn await_propagation(&mut self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        let sim = self.txs.get(tx_id).ok_or(LedgerError::UnknownTx(*tx_id))?;
        if sim.stage == Stage::Propagate {
            let t = sim.propagate_at;
            self.advance_to(t);
        }
        Ok(self.txs[tx_id].tx.clone())
    }

    /// Advance until `tx_id` is confirmed or reverted.
    pub fn await_final(&mut self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        loop {
            let sim = self.txs.get(tx_id).ok_or(LedgerError::UnknownTx(*tx_id))?;
            match sim.deadline() {
                Some(t) => {
                    self.advance_to(t);
                }
                None => return Ok(sim.tx.clone()),
            }
        }
    }
}

/// Thread-safe handle over a [`SimChain`].
#[derive(Debug)]
pub struct SimLedger {
    chain: RwLock<SimChain>,
}

impl SimLedger {
    pub fn new(config: ChainConfig) -> Result<Self, LedgerError> {
        Ok(Self::from_chain(SimChain::new(config)?))
    }

    pub fn from_chain(chain: SimChain) -> Self {
        Self { chain: RwLock::new(chain) }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, SimChain> {
        self.chain.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, SimChain> {
        self.chain.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn snapshot(&self) -> SimChain {
        self.read().clone()
    }

    pub fn advance_time(&self, delta_ms: u64) -> Vec<LifecycleEvent> {
        self.write().advance_time(delta_ms)
    }

    pub fn settle(&self) -> Vec<LifecycleEvent> {
        self.write().settle()
    }

    pub fn await_final(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        self.write().await_final(tx_id)
    }

    pub fn events(&self) -> Vec<LogMinted> {
        self.read().contract().events().to_vec()
    }

    pub fn trace(&self) -> Vec<LifecycleEvent> {
        self.read().trace().to_vec()
    }
}

impl Ledger for SimLedger {
    fn submit_log(&self, hash: &Digest, auditor: &AccountId) -> Result<LedgerTx, LedgerError> {
        Ok(self.write().submit_log(*hash, *auditor))
    }

    fn await_propagation(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        self.write().await_propagation(tx_id)
    }

    fn tx(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        self.read().tx(tx_id).cloned().ok_or(LedgerError::UnknownTx(*tx_id))
    }

    fn get_log(&self, hash: &Digest) -> Result<Option<LogEntry>, LedgerError> {
        Ok(self.read().contract().get_log(hash).cloned())
    }

    fn now_ms(&self) -> u64 {
        self.read().now_ms()
    }
}
