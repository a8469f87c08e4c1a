//! EVM JSON-RPC backend for the deployed log contract.
//!
//! Submission does a preflight `eth_call` of `logVulnerabilityHash` so that a
//! duplicate is reported as a reverted transaction with its reason instead of
//! burning gas. Transactions are signed locally (legacy, EIP-155) and sent
//! with `eth_sendRawTransaction`; acceptance by the node counts as
//! propagation. Receipts are polled for confirmation.

pub mod abi;
pub mod rlp;
pub mod tx;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AccountId, Ledger, LedgerError, LedgerTx, LogEntry, TxId, TxStatus};
use crate::digest::Digest;
use tx::{LegacyTx, Wallet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcConfig {
    pub url: String,
    pub chain_id: u64,
    pub contract: AccountId,
    #[serde(default = "default_gas_limit")]
    pub gas_limit: u64,
    #[serde(default = "default_confirmations")]
    pub confirmations_required: u64,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_gas_limit() -> u64 {
    120_000
}

fn default_confirmations() -> u64 {
    1
}

fn default_timeout_ms() -> u64 {
    10_000
}

pub fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Blocking JSON-RPC 2.0 transport over HTTP.
#[derive(Debug)]
pub struct JsonRpcClient {
    url: String,
    http: reqwest::blocking::Client,
    next_id: AtomicU64,
}

impl JsonRpcClient {
    pub fn new(url: &str, timeout: Duration) -> Result<Self, LedgerError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LedgerError::Config(format!("http client: {e}")))?;
        Ok(Self { url: url.to_owned(), http, next_id: AtomicU64::new(1) })
    }

    pub fn call(&self, method: &str, params: Value) -> Result<Value, LedgerError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let body = json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params});
        let resp = self
            .http
            .post(&self.url)
            .json(&body)
            .send()
            .map_err(|e| LedgerError::Transport(format!("{method}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(LedgerError::Transport(format!("{method}: HTTP {status}")));
        }
        let mut reply: Value =
            resp.json().map_err(|e| LedgerError::Transport(format!("{method}: bad body: {e}")))?;
        if let Some(err) = reply.get("error") {
            return Err(LedgerError::Rpc {
                code: err.get("code").and_then(Value::as_i64).unwrap_or(0),
                message: err.get("message").and_then(Value::as_str).unwrap_or("").to_owned(),
                data: revert_data(err.get("data")),
            });
        }
        reply
            .get_mut("result")
            .map(Value::take)
            .ok_or_else(|| LedgerError::Decode(format!("{method}: reply has no result")))
    }
}

/// Nodes report revert payloads either as a hex string or nested in an
/// object under `data`.
fn revert_data(data: Option<&Value>) -> Option<String> {
    match data? {
        Value::String(s) => Some(s.clone()),
        Value::Object(m) => revert_data(m.get("data")),
        _ => None,
    }
}

/// Reason string if `err` is a contract revert.
pub fn revert_reason(err: &LedgerError) -> Option<String> {
    let LedgerError::Rpc { message, data, .. } = err else { return None };
    if let Some(reason) = data
        .as_deref()
        .and_then(|d| hex::decode(d.trim_start_matches("0x")).ok())
        .and_then(|bytes| abi::decode_revert_reason(&bytes))
    {
        return Some(reason);
    }
    let lower = message.to_ascii_lowercase();
    if !lower.contains("revert") {
        return None;
    }
    for marker in ["reverted with reason string '", "execution reverted: "] {
        if let Some(idx) = message.find(marker) {
            let rest = &message[idx + marker.len()..];
            return Some(rest.trim_end_matches('\'').to_owned());
        }
    }
    Some(message.clone())
}

fn hex_data(bytes: &[u8]) -> String {
    format!("0x{}", hex::encode(bytes))
}

fn parse_quantity(v: &Value, what: &str) -> Result<u128, LedgerError> {
    let s = v.as_str().ok_or_else(|| LedgerError::Decode(format!("{what}: not a string")))?;
    u128::from_str_radix(s.trim_start_matches("0x"), 16)
        .map_err(|e| LedgerError::Decode(format!("{what}: {e}")))
}

fn parse_data(v: &Value, what: &str) -> Result<Vec<u8>, LedgerError> {
    let s = v.as_str().ok_or_else(|| LedgerError::Decode(format!("{what}: not a string")))?;
    hex::decode(s.trim_start_matches("0x")).map_err(|e| LedgerError::Decode(format!("{what}: {e}")))
}

pub struct RpcLedger {
    client: JsonRpcClient,
    wallet: Wallet,
    config: RpcConfig,
    submit_lock: Mutex<()>,
    txs: Mutex<BTreeMap<TxId, LedgerTx>>,
}

impl RpcLedger {
    pub fn new(config: RpcConfig, wallet: Wallet) -> Result<Self, LedgerError> {
        if config.confirmations_required == 0 {
            return Err(LedgerError::Config("confirmations_required must be at least 1".into()));
        }
        let client = JsonRpcClient::new(&config.url, Duration::from_millis(config.timeout_ms))?;
        Ok(Self { client, wallet, config, submit_lock: Mutex::new(()), txs: Mutex::new(BTreeMap::new()) })
    }

    pub fn address(&self) -> AccountId {
        self.wallet.address()
    }

    /// Compare the node's chain id with the configured one.
    pub fn check_chain_id(&self) -> Result<(), LedgerError> {
        let id = parse_quantity(&self.client.call("eth_chainId", json!([]))?, "eth_chainId")?;
        if id != u128::from(self.config.chain_id) {
            return Err(LedgerError::Config(format!(
                "node reports chain id {id}, configured {}",
                self.config.chain_id
            )));
        }
        Ok(())
    }

    fn eth_call(&self, data: &[u8], block: &str) -> Result<Vec<u8>, LedgerError> {
        let call = json!({
            "from": self.wallet.address().to_string(),
            "to": self.config.contract.to_string(),
            "data": hex_data(data),
        });
        let out = self.client.call("eth_call", json!([call, block]))?;
        parse_data(&out, "eth_call")
    }

    fn record(&self, tx: LedgerTx) -> LedgerTx {
        self.txs.lock().unwrap_or_else(|e| e.into_inner()).insert(tx.tx_id, tx.clone());
        tx
    }

    fn refresh(&self, mut tx: LedgerTx) -> Result<LedgerTx, LedgerError> {
        if tx.status.is_final() {
            return Ok(tx);
        }
        let receipt =
            self.client.call("eth_getTransactionReceipt", json!([tx.tx_id.to_string()]))?;
        if receipt.is_null() {
            return Ok(tx);
        }
        let status = parse_quantity(&receipt["status"], "receipt.status")?;
        let mined = parse_quantity(&receipt["blockNumber"], "receipt.blockNumber")?;
        if status == 0 {
            // Receipts carry no reason; replaying the call against the state
            // the tx executed on recovers it.
            let data = abi::encode_bytes32_call(abi::LOG_SIGNATURE, &tx.payload_hash);
            let replay = self.eth_call(&data, &format!("{:#x}", mined));
            let reason = replay.err().as_ref().and_then(revert_reason);
            tx.status = TxStatus::Reverted { reason: reason.unwrap_or_else(|| "execution reverted".into()) };
        } else {
            let head =
                parse_quantity(&self.client.call("eth_blockNumber", json!([]))?, "eth_blockNumber")?;
            if head + 1 >= mined + u128::from(self.config.confirmations_required) {
                tx.status = TxStatus::Confirmed;
                tx.confirmed_at = Some(unix_ms().max(tx.propagated_at.unwrap_or(0)));
            }
        }
        Ok(self.record(tx))
    }
}

impl Ledger for RpcLedger {
    fn submit_log(&self, hash: &Digest, auditor: &AccountId) -> Result<LedgerTx, LedgerError> {
        let signer = self.wallet.address();
        if *auditor != signer {
            return Err(LedgerError::AuditorMismatch { requested: *auditor, signer });
        }
        let _guard = self.submit_lock.lock().unwrap_or_else(|e| e.into_inner());
        let submitted_at = unix_ms();
        let data = abi::encode_bytes32_call(abi::LOG_SIGNATURE, hash);

        if let Err(err) = self.eth_call(&data, "latest") {
            let Some(reason) = revert_reason(&err) else { return Err(err) };
            // Never broadcast; the id identifies the rejected call.
            let mut preimage = data.clone();
            preimage.extend_from_slice(&signer.0);
            preimage.extend_from_slice(&submitted_at.to_be_bytes());
            return Ok(self.record(LedgerTx {
                tx_id: TxId(abi::keccak256(&preimage)),
                payload_hash: *hash,
                auditor: signer,
                submitted_at: Some(submitted_at),
                propagated_at: None,
                confirmed_at: None,
                status: TxStatus::Reverted { reason },
            }));
        }

        let nonce = parse_quantity(
            &self.client.call("eth_getTransactionCount", json!([signer.to_string(), "pending"]))?,
            "eth_getTransactionCount",
        )?;
        let gas_price = parse_quantity(&self.client.call("eth_gasPrice", json!([]))?, "eth_gasPrice")?;
        let signed = self.wallet.sign(&LegacyTx {
            nonce: u64::try_from(nonce).map_err(|_| LedgerError::Decode("nonce overflow".into()))?,
            gas_price,
            gas_limit: self.config.gas_limit,
            to: self.config.contract,
            value: 0,
            data,
            chain_id: self.config.chain_id,
        })?;
        let returned = self.client.call("eth_sendRawTransaction", json!([hex_data(&signed.raw)]))?;
        let returned: TxId = returned
            .as_str()
            .ok_or_else(|| LedgerError::Decode("tx hash is not a string".into()))?
            .parse()
            .map_err(LedgerError::Decode)?;
        if returned != signed.hash {
            return Err(LedgerError::Decode(format!(
                "node returned tx hash {returned}, expected {}",
                signed.hash
            )));
        }
        Ok(self.record(LedgerTx {
            tx_id: signed.hash,
            payload_hash: *hash,
            auditor: signer,
            submitted_at: Some(submitted_at),
            propagated_at: Some(unix_ms().max(submitted_at)),
            confirmed_at: None,
            status: TxStatus::Propagated,
        }))
    }

    fn await_propagation(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        // Acceptance by the node already happened inside submit_log.
        self.tx(tx_id)
    }

    fn tx(&self, tx_id: &TxId) -> Result<LedgerTx, LedgerError> {
        let known = self
            .txs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(tx_id)
            .cloned()
            .ok_or(LedgerError::UnknownTx(*tx_id))?;
        self.refresh(known)
    }

    fn get_log(&self, hash: &Digest) -> Result<Option<LogEntry>, LedgerError> {
        let ret = self.eth_call(&abi::encode_bytes32_call(abi::GET_LOG_SIGNATURE, hash), "latest")?;
        abi::decode_log_entry(&ret).map_err(LedgerError::Decode)
    }

    fn now_ms(&self) -> u64 {
        unix_ms()
    }
}
