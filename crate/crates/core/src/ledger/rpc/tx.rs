//! Legacy (EIP-155) transaction construction and signing.

use k256::ecdsa::SigningKey;

use super::abi::keccak256;
use super::rlp;
use crate::ledger::{AccountId, LedgerError, TxId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegacyTx {
    pub nonce: u64,
    pub gas_price: u128,
    pub gas_limit: u64,
    pub to: AccountId,
    pub value: u128,
    pub data: Vec<u8>,
    pub chain_id: u64,
}

impl LegacyTx {
    fn base_fields(&self) -> Vec<Vec<u8>> {
        vec![
            rlp::encode_uint(self.nonce.into()),
            rlp::encode_uint(self.gas_price),
            rlp::encode_uint(self.gas_limit.into()),
            rlp::encode_bytes(&self.to.0),
            rlp::encode_uint(self.value),
            rlp::encode_bytes(&self.data),
        ]
    }

    /// Keccak-256 of the EIP-155 signing payload.
    pub fn signing_hash(&self) -> [u8; 32] {
        let mut fields = self.base_fields();
        fields.push(rlp::encode_uint(self.chain_id.into()));
        fields.push(rlp::encode_uint(0));
        fields.push(rlp::encode_uint(0));
        keccak256(&rlp::encode_list(&fields))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTx {
    pub raw: Vec<u8>,
    pub hash: TxId,
}

pub struct Wallet {
    key: SigningKey,
    address: AccountId,
}

impl std::fmt::Debug for Wallet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wallet").field("address", &self.address).finish_non_exhaustive()
    }
}

impl Wallet {
    pub fn from_hex(secret: &str) -> Result<Self, LedgerError> {
        let body = secret.trim().trim_start_matches("0x");
        let bytes = hex::decode(body).map_err(|e| LedgerError::Config(format!("private key: {e}")))?;
        let key = SigningKey::from_slice(&bytes)
            .map_err(|e| LedgerError::Config(format!("private key: {e}")))?;
        let point = key.verifying_key().to_encoded_point(false);
        let hash = keccak256(&point.as_bytes()[1..]);
        let address = AccountId(hash[12..].try_into().expect("20 bytes"));
        Ok(Self { key, address })
    }

    pub fn address(&self) -> AccountId {
        self.address
    }

    pub fn sign(&self, tx: &LegacyTx) -> Result<SignedTx, LedgerError> {
        let (sig, recid) = self
            .key
            .sign_prehash_recoverable(&tx.signing_hash())
            .map_err(|e| LedgerError::Config(format!("signing failed: {e}")))?;
        let v = u128::from(tx.chain_id) * 2 + 35 + u128::from(recid.to_byte());
        let (r, s) = sig.split_bytes();
        let mut fields = tx.base_fields();
        fields.push(rlp::encode_uint(v));
        fields.push(rlp::encode_uint_bytes(&r));
        fields.push(rlp::encode_uint_bytes(&s));
        let raw = rlp::encode_list(&fields);
        let hash = TxId(keccak256(&raw));
        Ok(SignedTx { raw, hash })
    }
}
