//! In-process EVM JSON-RPC node for wire-client tests.
//!
//! Serves the methods the client uses over HTTP/1.1, decodes and
//! sender-recovers signed legacy transactions, and executes the log contract
//! with the same write-once rule as the on-chain version. Transactions stay
//! pending until mined, either on arrival (`auto_mine`) or by [`MockNode::mine`].

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use anchorscan::digest::Digest;
use anchorscan::ledger::rpc::abi;
use anchorscan::ledger::{AccountId, LogEntry, REVERT_DUPLICATE};
use k256::ecdsa::{RecoveryId, Signature, VerifyingKey};
use serde_json::{json, Value};

pub const CHAIN_ID: u64 = 31337;
pub const CONTRACT: AccountId = AccountId([0xc0; 20]);
pub const GENESIS_TIMESTAMP: u64 = 1_735_689_600;
/// Key of the first account on common local dev nodes.
pub const DEV_KEY: &str = "ac0974bec39a17e36ba4a6b4d238ff944bacb478cbed5efcae784d7bf4f2ff80";

/// Injected failures, consumed one request at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Reply with HTTP 503.
    Unavailable,
    /// Close the connection without replying.
    Drop,
}

#[derive(Debug, Clone)]
struct Receipt {
    status: bool,
    block: u64,
    logs: Vec<(Digest, AccountId)>,
}

#[derive(Debug, Clone)]
struct PendingTx {
    hash: [u8; 32],
    from: AccountId,
    to: AccountId,
    data: Vec<u8>,
}

#[derive(Debug, Default)]
struct State {
    block: u64,
    timestamp: u64,
    nonces: BTreeMap<AccountId, u64>,
    logs: BTreeMap<Digest, LogEntry>,
    pending: Vec<PendingTx>,
    receipts: BTreeMap<[u8; 32], Receipt>,
    events: Vec<(Digest, AccountId)>,
    faults: Vec<Fault>,
    requests: Vec<String>,
    auto_mine: bool,
}

impl State {
    fn mine(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        self.block += 1;
        self.timestamp += 2;
        for tx in std::mem::take(&mut self.pending) {
            let receipt = self.execute(&tx);
            self.receipts.insert(tx.hash, receipt);
        }
    }

    fn execute(&mut self, tx: &PendingTx) -> Receipt {
        let revert = Receipt { status: false, block: self.block, logs: vec![] };
        if tx.to != CONTRACT || tx.data.len() != 36 || tx.data[..4] != abi::selector(abi::LOG_SIGNATURE) {
            return revert;
        }
        let hash = Digest::from_slice(&tx.data[4..]).expect("32 bytes");
        if self.logs.contains_key(&hash) {
            return revert;
        }
        let entry = LogEntry { report_hash: hash, timestamp: self.timestamp, auditor: tx.from, verified: false };
        self.logs.insert(hash, entry);
        self.events.push((hash, tx.from));
        Receipt { status: true, block: self.block, logs: vec![(hash, tx.from)] }
    }
}

pub struct MockNode {
    url: String,
    state: Arc<Mutex<State>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockNode {
    pub fn start(auto_mine: bool) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let url = format!("http://{}", listener.local_addr().unwrap());
        let state = Arc::new(Mutex::new(State { timestamp: GENESIS_TIMESTAMP, auto_mine, ..Default::default() }));
        let stop = Arc::new(AtomicBool::new(false));
        let (s, st) = (state.clone(), stop.clone());
        let handle = std::thread::spawn(move || {
            for conn in listener.incoming() {
                if st.load(Ordering::SeqCst) {
                    break;
                }
                if let Ok(conn) = conn {
                    serve(conn, &s);
                }
            }
        });
        Self { url, state, stop, handle: Some(handle) }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap()
    }

    pub fn mine(&self) {
        self.lock().mine();
    }

    pub fn inject(&self, faults: &[Fault]) {
        self.lock().faults.extend_from_slice(faults);
    }

    pub fn events(&self) -> Vec<(Digest, AccountId)> {
        self.lock().events.clone()
    }

    pub fn pending(&self) -> usize {
        self.lock().pending.len()
    }

    pub fn block_number(&self) -> u64 {
        self.lock().block
    }

    /// Methods of every request received, in order.
    pub fn requests(&self) -> Vec<String> {
        self.lock().requests.clone()
    }
}

impl Drop for MockNode {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.url.trim_start_matches("http://"));
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(conn: TcpStream, state: &Mutex<State>) {
    let mut reader = BufReader::new(conn.try_clone().expect("clone stream"));
    let mut len = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let fault = {
        let mut s = state.lock().unwrap();
        if s.faults.is_empty() {
            None
        } else {
            Some(s.faults.remove(0))
        }
    };
    let mut conn = conn;
    let (status, reply) = match fault {
        Some(Fault::Drop) => return,
        Some(Fault::Unavailable) => ("503 Service Unavailable", "unavailable".to_owned()),
        None => {
            let req: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
            let id = req["id"].clone();
            let method = req["method"].as_str().unwrap_or("").to_owned();
            let mut s = state.lock().unwrap();
            s.requests.push(method.clone());
            let reply = match handle(&mut s, &method, &req["params"]) {
                Ok(result) => json!({"jsonrpc": "2.0", "id": id, "result": result}),
                Err(error) => json!({"jsonrpc": "2.0", "id": id, "error": error}),
            };
            ("200 OK", reply.to_string())
        }
    };
    let _ = write!(
        conn,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    );
}

fn quantity(v: u128) -> Value {
    Value::String(format!("{v:#x}"))
}

fn data(bytes: &[u8]) -> Value {
    Value::String(format!("0x{}", hex::encode(bytes)))
}

fn rpc_err(code: i64, message: &str) -> Value {
    json!({"code": code, "message": message})
}

fn param_bytes(v: &Value) -> Result<Vec<u8>, Value> {
    let s = v.as_str().ok_or_else(|| rpc_err(-32602, "expected hex data"))?;
    hex::decode(s.trim_start_matches("0x")).map_err(|_| rpc_err(-32602, "bad hex"))
}

fn handle(s: &mut State, method: &str, params: &Value) -> Result<Value, Value> {
    match method {
        "eth_chainId" => Ok(quantity(CHAIN_ID.into())),
        "eth_blockNumber" => Ok(quantity(s.block.into())),
        "eth_gasPrice" => Ok(quantity(25_000_000_000)),
        "eth_getTransactionCount" => {
            let who: AccountId = params[0].as_str().unwrap_or("").parse().map_err(|_| rpc_err(-32602, "bad address"))?;
            let mined = s.nonces.get(&who).copied().unwrap_or(0);
            Ok(quantity(mined.into()))
        }
        "eth_call" => {
            let to: AccountId = params[0]["to"].as_str().unwrap_or("").parse().map_err(|_| rpc_err(-32602, "bad to"))?;
            let input = param_bytes(&params[0]["data"])?;
            if to != CONTRACT || input.len() != 36 {
                return Ok(data(&[]));
            }
            let hash = Digest::from_slice(&input[4..]).expect("32 bytes");
            if input[..4] == abi::selector(abi::GET_LOG_SIGNATURE) {
                return Ok(data(&abi::encode_log_entry(s.logs.get(&hash))));
            }
            if input[..4] == abi::selector(abi::LOG_SIGNATURE) {
                if s.logs.contains_key(&hash) {
                    return Err(json!({
                        "code": 3,
                        "message": format!("execution reverted: {REVERT_DUPLICATE}"),
                        "data": data(&abi::encode_revert_reason(REVERT_DUPLICATE)),
                    }));
                }
                return Ok(data(&[]));
            }
            Err(rpc_err(3, "execution reverted"))
        }
        "eth_sendRawTransaction" => {
            let raw = param_bytes(&params[0])?;
            let tx = decode_signed(&raw).map_err(|e| rpc_err(-32000, &e))?;
            let expected = s.nonces.get(&tx.from).copied().unwrap_or(0);
            if tx.nonce != expected {
                return Err(rpc_err(-32000, &format!("nonce too low: expected {expected}, got {}", tx.nonce)));
            }
            s.nonces.insert(tx.from, expected + 1);
            let hash = abi::keccak256(&raw);
            s.pending.push(PendingTx { hash, from: tx.from, to: tx.to, data: tx.data });
            if s.auto_mine {
                s.mine();
            }
            Ok(data(&hash))
        }
        "eth_getTransactionReceipt" => {
            let hash: [u8; 32] = param_bytes(&params[0])?.try_into().map_err(|_| rpc_err(-32602, "bad hash"))?;
            Ok(match s.receipts.get(&hash) {
                None => Value::Null,
                Some(r) => json!({
                    "transactionHash": data(&hash),
                    "blockNumber": quantity(r.block.into()),
                    "status": quantity(u128::from(r.status)),
                    "logs": r.logs.iter().map(|(h, a)| json!({
                        "address": CONTRACT.to_string(),
                        "topics": [
                            data(&abi::keccak256(abi::LOG_MINTED_SIGNATURE.as_bytes())),
                            data(h.as_bytes()),
                            data(&[[0u8; 12].as_slice(), &a.0].concat()),
                        ],
                        "data": "0x",
                    })).collect::<Vec<_>>(),
                }),
            })
        }
        _ => Err(rpc_err(-32601, "method not found")),
    }
}

struct Decoded {
    nonce: u64,
    from: AccountId,
    to: AccountId,
    data: Vec<u8>,
}

/// Minimal RLP reader: returns (payload, is_list, rest).
fn rlp_item(buf: &[u8]) -> Result<(&[u8], bool, &[u8]), String> {
    let (&b, rest) = buf.split_first().ok_or("empty rlp")?;
    let take = |off: usize, len: usize| -> Result<(&[u8], &[u8]), String> {
        let end = off.checked_add(len).ok_or("overflow")?;
        if buf.len() < end {
            return Err("truncated rlp".into());
        }
        Ok((&buf[off..end], &buf[end..]))
    };
    let long_len = |n: usize| -> Result<usize, String> {
        let bytes = rest.get(..n).ok_or("truncated length")?;
        Ok(bytes.iter().fold(0usize, |acc, b| acc << 8 | *b as usize))
    };
    match b {
        0x00..=0x7f => Ok((&buf[..1], false, rest)),
        0x80..=0xb7 => take(1, (b - 0x80) as usize).map(|(p, r)| (p, false, r)),
        0xb8..=0xbf => {
            let n = (b - 0xb7) as usize;
            take(1 + n, long_len(n)?).map(|(p, r)| (p, false, r))
        }
        0xc0..=0xf7 => take(1, (b - 0xc0) as usize).map(|(p, r)| (p, true, r)),
        _ => {
            let n = (b - 0xf7) as usize;
            take(1 + n, long_len(n)?).map(|(p, r)| (p, true, r))
        }
    }
}

fn uint(bytes: &[u8]) -> u128 {
    bytes.iter().fold(0u128, |acc, b| acc << 8 | u128::from(*b))
}

fn decode_signed(raw: &[u8]) -> Result<Decoded, String> {
    let (list, is_list, rest) = rlp_item(raw)?;
    if !is_list || !rest.is_empty() {
        return Err("not a legacy transaction".into());
    }
    let mut fields = Vec::new();
    let mut cur = list;
    while !cur.is_empty() {
        let (item, _, r) = rlp_item(cur)?;
        fields.push(item);
        cur = r;
    }
    if fields.len() != 9 {
        return Err(format!("expected 9 fields, got {}", fields.len()));
    }
    let v = uint(fields[6]);
    let recid = v
        .checked_sub(u128::from(CHAIN_ID) * 2 + 35)
        .filter(|r| *r <= 1)
        .ok_or_else(|| format!("v={v} does not match chain id {CHAIN_ID}"))?;
    let mut sig = [0u8; 64];
    for (i, f) in [fields[7], fields[8]].into_iter().enumerate() {
        if f.len() > 32 {
            return Err("signature scalar too long".into());
        }
        sig[i * 32 + 32 - f.len()..(i + 1) * 32].copy_from_slice(f);
    }
    // Rebuild the EIP-155 signing payload from the first six fields.
    let mut unsigned = Vec::new();
    let mut cur = list;
    for _ in 0..6 {
        let (_, _, r) = rlp_item(cur)?;
        unsigned.extend_from_slice(&cur[..cur.len() - r.len()]);
        cur = r;
    }
    for tail in [anchorscan::ledger::rpc::rlp::encode_uint(CHAIN_ID.into()), vec![0x80], vec![0x80]] {
        unsigned.extend_from_slice(&tail);
    }
    let mut payload = Vec::new();
    if unsigned.len() < 56 {
        payload.push(0xc0 + unsigned.len() as u8);
    } else {
        let len = unsigned.len().to_be_bytes();
        let len = &len[len.iter().position(|b| *b != 0).unwrap_or(len.len() - 1)..];
        payload.push(0xf7 + len.len() as u8);
        payload.extend_from_slice(len);
    }
    payload.extend_from_slice(&unsigned);
    let signing_hash = abi::keccak256(&payload);
    let signature = Signature::from_slice(&sig).map_err(|e| e.to_string())?;
    let key = VerifyingKey::recover_from_prehash(&signing_hash, &signature, RecoveryId::from_byte(recid as u8).expect("0 or 1"))
        .map_err(|e| e.to_string())?;
    let point = key.to_encoded_point(false);
    let from = AccountId(abi::keccak256(&point.as_bytes()[1..])[12..].try_into().expect("20 bytes"));
    let to = AccountId(fields[3].try_into().map_err(|_| "to must be 20 bytes")?);
    Ok(Decoded { nonce: u64::try_from(uint(fields[0])).map_err(|_| "nonce overflow")?, from, to, data: fields[5].to_vec() })
}
