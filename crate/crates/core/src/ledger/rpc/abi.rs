//! ABI encoding for the two contract methods the client calls.

use sha3::{Digest as _, Keccak256};

use crate::digest::Digest;
use crate::ledger::{AccountId, LogEntry};

pub const LOG_SIGNATURE: &str = "logVulnerabilityHash(bytes32)";
pub const GET_LOG_SIGNATURE: &str = "getLog(bytes32)";
pub const LOG_MINTED_SIGNATURE: &str = "LogMinted(bytes32,address)";

/// Published contract ABI (`abi/LogContract.json`).
pub const ABI_JSON: &str = include_str!("../../../../../abi/LogContract.json");

/// Canonical `name(type,...)` signature of the `kind` entry (`function` or
/// `event`) called `name` in an ABI document. Tuples expand to `(a,b)`.
pub fn abi_signature(abi: &str, kind: &str, name: &str) -> Option<String> {
    fn ty(param: &serde_json::Value) -> Option<String> {
        let t = param["type"].as_str()?;
        match t.strip_prefix("tuple") {
            Some(suffix) => {
                let parts: Option<Vec<String>> = param["components"].as_array()?.iter().map(ty).collect();
                Some(format!("({}){suffix}", parts?.join(",")))
            }
            None => Some(t.to_owned()),
        }
    }
    let doc: serde_json::Value = serde_json::from_str(abi).ok()?;
    let entry = doc.as_array()?.iter().find(|e| e["type"] == kind && e["name"] == name)?;
    let inputs: Option<Vec<String>> = entry["inputs"].as_array()?.iter().map(ty).collect();
    Some(format!("{name}({})", inputs?.join(",")))
}

/// Selector of the standard `Error(string)` revert payload.
const ERROR_STRING_SELECTOR: [u8; 4] = [0x08, 0xc3, 0x79, 0xa0];

pub fn keccak256(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

pub fn selector(signature: &str) -> [u8; 4] {
    let h = keccak256(signature.as_bytes());
    [h[0], h[1], h[2], h[3]]
}

/// Calldata for a method taking a single `bytes32`.
pub fn encode_bytes32_call(signature: &str, word: &Digest) -> Vec<u8> {
    let mut data = Vec::with_capacity(36);
    data.extend_from_slice(&selector(signature));
    data.extend_from_slice(word.as_bytes());
    data
}

/// Decode the static `(bytes32, uint256, address, bool)` tuple returned by
/// `getLog`. A zero timestamp means the slot is empty.
pub fn decode_log_entry(ret: &[u8]) -> Result<Option<LogEntry>, String> {
    if ret.len() != 128 {
        return Err(format!("getLog returned {} bytes, expected 128", ret.len()));
    }
    let word = |i: usize| &ret[i * 32..(i + 1) * 32];
    let report_hash = Digest::from_slice(word(0)).expect("32-byte word");
    let ts = word(1);
    if ts[..24].iter().any(|b| *b != 0) {
        return Err("timestamp does not fit in 64 bits".into());
    }
    let timestamp = u64::from_be_bytes(ts[24..].try_into().expect("8 bytes"));
    let addr = word(2);
    if addr[..12].iter().any(|b| *b != 0) {
        return Err("address word has non-zero padding".into());
    }
    let auditor = AccountId(addr[12..].try_into().expect("20 bytes"));
    let verified = match word(3) {
        w if w.iter().all(|b| *b == 0) => false,
        w if w[..31].iter().all(|b| *b == 0) && w[31] == 1 => true,
        _ => return Err("bool word is not 0 or 1".into()),
    };
    if timestamp == 0 {
        return Ok(None);
    }
    Ok(Some(LogEntry { report_hash, timestamp, auditor, verified }))
}

pub fn encode_log_entry(entry: Option<&LogEntry>) -> Vec<u8> {
    let mut out = vec![0u8; 128];
    if let Some(e) = entry {
        out[..32].copy_from_slice(e.report_hash.as_bytes());
        out[56..64].copy_from_slice(&e.timestamp.to_be_bytes());
        out[76..96].copy_from_slice(&e.auditor.0);
        out[127] = u8::from(e.verified);
    }
    out
}

/// Reason string from an `Error(string)` revert payload.
pub fn decode_revert_reason(data: &[u8]) -> Option<String> {
    let body = data.strip_prefix(&ERROR_STRING_SELECTOR)?;
    if body.len() < 64 {
        return None;
    }
    let offset = usize::try_from(u64::from_be_bytes(body[24..32].try_into().ok()?)).ok()?;
    let len_word = body.get(offset..offset + 32)?;
    let len = usize::try_from(u64::from_be_bytes(len_word[24..].try_into().ok()?)).ok()?;
    let start = offset + 32;
    let bytes = body.get(start..start + len)?;
    String::from_utf8(bytes.to_vec()).ok()
}

pub fn encode_revert_reason(reason: &str) -> Vec<u8> {
    let mut out = ERROR_STRING_SELECTOR.to_vec();
    let mut word = [0u8; 32];
    word[31] = 0x20;
    out.extend_from_slice(&word);
    word = [0u8; 32];
    word[24..].copy_from_slice(&(reason.len() as u64).to_be_bytes());
    out.extend_from_slice(&word);
    out.extend_from_slice(reason.as_bytes());
    out.resize(out.len() + (32 - reason.len() % 32) % 32, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keccak_reference_vectors() {
        assert_eq!(
            hex::encode(keccak256(b"")),
            "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
        );
        // ERC-20 transfer selector, widely published.
        assert_eq!(selector("transfer(address,uint256)"), [0xa9, 0x05, 0x9c, 0xbb]);
        assert_eq!(selector("Error(string)"), ERROR_STRING_SELECTOR);
    }

    #[test]
    fn published_abi_matches_client() {
        assert_eq!(abi_signature(ABI_JSON, "function", "logVulnerabilityHash").as_deref(), Some(LOG_SIGNATURE));
        assert_eq!(abi_signature(ABI_JSON, "function", "getLog").as_deref(), Some(GET_LOG_SIGNATURE));
        assert_eq!(abi_signature(ABI_JSON, "event", "LogMinted").as_deref(), Some(LOG_MINTED_SIGNATURE));
        let doc: serde_json::Value = serde_json::from_str(ABI_JSON).unwrap();
        let get_log = doc.as_array().unwrap().iter().find(|e| e["name"] == "getLog").unwrap();
        let out = &get_log["outputs"][0];
        assert_eq!(ty_list(out), "(bytes32,uint256,address,bool)");
        assert_eq!(get_log["stateMutability"], "view");
    }

    fn ty_list(tuple: &serde_json::Value) -> String {
        let parts: Vec<&str> = tuple["components"].as_array().unwrap().iter().map(|c| c["type"].as_str().unwrap()).collect();
        format!("({})", parts.join(","))
    }

    #[test]
    fn call_layout() {
        let d = Digest::of(b"r");
        let data = encode_bytes32_call(LOG_SIGNATURE, &d);
        assert_eq!(data.len(), 36);
        assert_eq!(&data[..4], &selector(LOG_SIGNATURE));
        assert_eq!(&data[4..], d.as_bytes());
    }

    #[test]
    fn log_entry_round_trip_and_absent() {
        let e = LogEntry {
            report_hash: Digest::of(b"x"),
            timestamp: 1_735_689_600,
            auditor: AccountId([0x42; 20]),
            verified: false,
        };
        assert_eq!(decode_log_entry(&encode_log_entry(Some(&e))).unwrap(), Some(e));
        assert_eq!(decode_log_entry(&encode_log_entry(None)).unwrap(), None);
        assert!(decode_log_entry(&[0u8; 96]).is_err());
    }

    #[test]
    fn revert_reason_round_trip() {
        let data = encode_revert_reason("Hash already exists");
        assert_eq!(data.len(), 4 + 32 * 3);
        assert_eq!(decode_revert_reason(&data).as_deref(), Some("Hash already exists"));
        assert_eq!(decode_revert_reason(&data[..40]), None);
    }
}
