//! Minimal RLP encoder (strings, unsigned integers, lists).

fn length_prefix(len: usize, short: u8, out: &mut Vec<u8>) {
    if len <= 55 {
        out.push(short + len as u8);
    } else {
        let be = (len as u64).to_be_bytes();
        let skip = be.iter().take_while(|b| **b == 0).count();
        out.push(short + 55 + (8 - skip) as u8);
        out.extend_from_slice(&be[skip..]);
    }
}

pub fn encode_bytes(bytes: &[u8]) -> Vec<u8> {
    if bytes.len() == 1 && bytes[0] < 0x80 {
        return vec![bytes[0]];
    }
    let mut out = Vec::with_capacity(bytes.len() + 9);
    length_prefix(bytes.len(), 0x80, &mut out);
    out.extend_from_slice(bytes);
    out
}

/// Big-endian with leading zeros stripped; zero encodes as the empty string.
pub fn encode_uint(value: u128) -> Vec<u8> {
    let be = value.to_be_bytes();
    let skip = be.iter().take_while(|b| **b == 0).count();
    encode_bytes(&be[skip..])
}

/// Same as [`encode_uint`] for a big-endian byte string (e.g. a signature
/// scalar).
pub fn encode_uint_bytes(be: &[u8]) -> Vec<u8> {
    let skip = be.iter().take_while(|b| **b == 0).count();
    encode_bytes(&be[skip..])
}

/// Wrap already-encoded items in a list header.
pub fn encode_list(items: &[Vec<u8>]) -> Vec<u8> {
    let payload: usize = items.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(payload + 9);
    length_prefix(payload, 0xc0, &mut out);
    for item in items {
        out.extend_from_slice(item);
    }
    out
}
