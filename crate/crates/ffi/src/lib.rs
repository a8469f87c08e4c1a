//! C ABI over report hashing, verification and the simulated ledger.
//!
//! Every function returns an [`AsStatus`]. On failure a message is kept per
//! thread and can be read with [`as_last_error`]. Panics never cross the
//! boundary; they are reported as [`AsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anchorscan::digest::Digest;
use anchorscan::ledger::{AccountId, ChainConfig, Ledger, LedgerError, LedgerTx, SimLedger, TxId, TxStatus};
use anchorscan::report;
use anchorscan::verifier::{self, VerdictState, VerifyError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidReport = 3,
    Ledger = 4,
    UnknownTx = 5,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsTxState {
    Pending = 0,
    Propagated = 1,
    Confirmed = 2,
    Reverted = 3,
}

/// Values match the CLI exit codes for the same outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsVerdictState {
    Intact = 0,
    Tampered = 2,
    NotLogged = 3,
}

/// Transaction snapshot. Timestamps are unix ms, 0 when not yet reached.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsTx {
    pub tx_id: [u8; 32],
    pub payload_hash: [u8; 32],
    pub auditor: [u8; 20],
    pub state: AsTxState,
    /// Set when the transaction reverted because the hash was already stored.
    pub duplicate: bool,
    pub submitted_at: u64,
    pub propagated_at: u64,
    pub confirmed_at: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsLogEntry {
    pub report_hash: [u8; 32],
    /// Block time, unix seconds.
    pub timestamp: u64,
    pub auditor: [u8; 20],
    pub verified: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsVerdict {
    pub state: AsVerdictState,
    /// Digest recomputed from the supplied bytes.
    pub actual: [u8; 32],
    /// The stored entry; meaningful only when `state` is `Intact`.
    pub entry: AsLogEntry,
}

/// Opaque handle to a simulated chain with the log contract deployed.
pub struct AsSimLedger(SimLedger);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

struct Failure(AsStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(AsStatus::NullArgument, format!("{what} is null"))
    }
}

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        let status = match e {
            LedgerError::UnknownTx(_) => AsStatus::UnknownTx,
            LedgerError::Config(_) => AsStatus::InvalidArgument,
            _ => AsStatus::Ledger,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            AsStatus::Panic
        }
    }
}

unsafe fn bytes<'a>(data: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn array<'a, const N: usize>(p: *const [u8; N], what: &str) -> Result<&'a [u8; N], Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn handle<'a>(p: *const AsSimLedger) -> Result<&'a SimLedger, Failure> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| Failure::null("ledger"))
}

fn tx_view(tx: &LedgerTx) -> AsTx {
    let state = match tx.status {
        TxStatus::Pending => AsTxState::Pending,
        TxStatus::Propagated => AsTxState::Propagated,
        TxStatus::Confirmed => AsTxState::Confirmed,
        TxStatus::Reverted { .. } => AsTxState::Reverted,
    };
    AsTx {
        tx_id: tx.tx_id.0,
        payload_hash: *tx.payload_hash.as_bytes(),
        auditor: tx.auditor.0,
        state,
        duplicate: tx.status.is_duplicate_revert(),
        submitted_at: tx.submitted_at.unwrap_or(0),
        propagated_at: tx.propagated_at.unwrap_or(0),
        confirmed_at: tx.confirmed_at.unwrap_or(0),
    }
}

const EMPTY_ENTRY: AsLogEntry = AsLogEntry { report_hash: [0; 32], timestamp: 0, auditor: [0; 20], verified: false };

/// Message for the last failed call on this thread, or null after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn as_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// SHA-256 of `len` bytes at `data`.
///
/// # Safety
/// `data` must point to `len` readable bytes (or may be null when `len` is 0)
/// and `out` must point to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn as_sha256(data: *const u8, len: usize, out: *mut [u8; 32]) -> AsStatus {
    guard(|| {
        let input = bytes(data, len, "data")?;
        *self::out(out, "out")? = *Digest::of(input).as_bytes();
        Ok(())
    })
}

/// Parse report JSON, check its invariants and write its canonical encoding
/// to a new buffer. Release it with [`as_bytes_free`].
///
/// # Safety
/// `json` must point to `len` readable bytes; `out` and `out_len` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn as_report_canonicalize(
    json: *const u8,
    len: usize,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> AsStatus {
    guard(|| {
        let input = bytes(json, len, "json")?;
        let (out, out_len) = (self::out(out, "out")?, self::out(out_len, "out_len")?);
        let canonical = report::parse(input)
            .and_then(|r| report::canonicalize(&r))
            .map_err(|e| Failure(AsStatus::InvalidReport, e.to_string()))?;
        let boxed = canonical.into_boxed_slice();
        *out_len = boxed.len();
        *out = Box::into_raw(boxed).cast();
        Ok(())
    })
}

/// Free a buffer returned by [`as_report_canonicalize`].
///
/// # Safety
/// `data` and `len` must come from one successful call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn as_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Digest of the canonical encoding of report JSON.
///
/// # Safety
/// `json` must point to `len` readable bytes and `out` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn as_report_hash(json: *const u8, len: usize, out: *mut [u8; 32]) -> AsStatus {
    guard(|| {
        let input = bytes(json, len, "json")?;
        let out = self::out(out, "out")?;
        let digest = report::parse(input)
            .and_then(|r| report::hash_report(&r))
            .map_err(|e| Failure(AsStatus::InvalidReport, e.to_string()))?;
        *out = *digest.as_bytes();
        Ok(())
    })
}

/// Create a simulated ledger. `config_json` is a chain configuration object
/// or null for the default testnet profile with seed 0.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_new(config_json: *const c_char, out: *mut *mut AsSimLedger) -> AsStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let config = if config_json.is_null() {
            ChainConfig::default()
        } else {
            let text = CStr::from_ptr(config_json)
                .to_str()
                .map_err(|e| Failure(AsStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
            serde_json::from_str(text).map_err(|e| Failure(AsStatus::InvalidArgument, format!("config: {e}")))?
        };
        *out = Box::into_raw(Box::new(AsSimLedger(SimLedger::new(config)?)));
        Ok(())
    })
}

/// # Safety
/// `ledger` must be null or a handle from [`as_sim_ledger_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_free(ledger: *mut AsSimLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}

/// Submit `hash` for anchoring by `auditor`. A duplicate of a stored hash
/// returns a transaction already in the reverted state.
///
/// # Safety
/// Pointers must be valid for their array sizes; `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_submit(
    ledger: *const AsSimLedger,
    hash: *const [u8; 32],
    auditor: *const [u8; 20],
    out: *mut AsTx,
) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        let hash = Digest::from_bytes(*array(hash, "hash")?);
        let auditor = AccountId(*array(auditor, "auditor")?);
        let out = self::out(out, "out")?;
        *out = tx_view(&ledger.submit_log(&hash, &auditor)?);
        Ok(())
    })
}

/// Current state of a submitted transaction.
///
/// # Safety
/// Pointers must be valid for their array sizes; `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_tx(ledger: *const AsSimLedger, tx_id: *const [u8; 32], out: *mut AsTx) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        let tx_id = TxId(*array(tx_id, "tx_id")?);
        let out = self::out(out, "out")?;
        *out = tx_view(&ledger.tx(&tx_id)?);
        Ok(())
    })
}

/// Run the clock until the transaction is confirmed or reverted.
///
/// # Safety
/// Pointers must be valid for their types; `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_await_final(
    ledger: *const AsSimLedger,
    tx_id: *const [u8; 32],
    out: *mut AsTx,
) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        let tx_id = TxId(*array(tx_id, "tx_id")?);
        let out = self::out(out, "out")?;
        *out = tx_view(&ledger.await_final(&tx_id)?);
        Ok(())
    })
}

/// Advance the virtual clock by `delta_ms`, applying due lifecycle events.
///
/// # Safety
/// `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_advance(ledger: *const AsSimLedger, delta_ms: u64) -> AsStatus {
    guard(|| {
        handle(ledger)?.advance_time(delta_ms);
        Ok(())
    })
}

/// Run the clock until no transaction is in flight.
///
/// # Safety
/// `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_settle(ledger: *const AsSimLedger) -> AsStatus {
    guard(|| {
        handle(ledger)?.settle();
        Ok(())
    })
}

/// Virtual clock, unix ms.
///
/// # Safety
/// `ledger` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_now_ms(ledger: *const AsSimLedger, out: *mut u64) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        *self::out(out, "out")? = ledger.now_ms();
        Ok(())
    })
}

/// Look up the stored entry for `hash`. `found` is false when absent.
///
/// # Safety
/// Pointers must be valid for their types; `ledger` must be live.
#[no_mangle]
pub unsafe extern "C" fn as_sim_ledger_get_log(
    ledger: *const AsSimLedger,
    hash: *const [u8; 32],
    found: *mut bool,
    out: *mut AsLogEntry,
) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        let hash = Digest::from_bytes(*array(hash, "hash")?);
        let (found, out) = (self::out(found, "found")?, self::out(out, "out")?);
        let entry = ledger.get_log(&hash)?;
        *found = entry.is_some();
        *out = entry.map_or(EMPTY_ENTRY, |e| AsLogEntry {
            report_hash: *e.report_hash.as_bytes(),
            timestamp: e.timestamp,
            auditor: e.auditor.0,
            verified: e.verified,
        });
        Ok(())
    })
}

/// Verify report bytes against the ledger and, when `expected` is not null,
/// against the digest recorded for them.
///
/// # Safety
/// `data` must point to `len` readable bytes, `expected` must be null or
/// point to 32 bytes, `out` must be writable and `ledger` live.
#[no_mangle]
pub unsafe extern "C" fn as_verify(
    ledger: *const AsSimLedger,
    data: *const u8,
    len: usize,
    expected: *const [u8; 32],
    out: *mut AsVerdict,
) -> AsStatus {
    guard(|| {
        let ledger = handle(ledger)?;
        let input = bytes(data, len, "data")?;
        let expected = expected.as_ref().map(|e| Digest::from_bytes(*e));
        let out = self::out(out, "out")?;
        let verdict = verifier::verify(input, expected.as_ref(), ledger).map_err(|e| match e {
            VerifyError::Unverifiable(e) => Failure::from(e),
            other => Failure(AsStatus::Ledger, other.to_string()),
        })?;
        *out = match verdict.state {
            VerdictState::Intact { digest, entry } => AsVerdict {
                state: AsVerdictState::Intact,
                actual: *digest.as_bytes(),
                entry: AsLogEntry {
                    report_hash: *entry.report_hash.as_bytes(),
                    timestamp: entry.timestamp,
                    auditor: entry.auditor.0,
                    verified: entry.verified,
                },
            },
            VerdictState::Tampered { actual, .. } => {
                AsVerdict { state: AsVerdictState::Tampered, actual: *actual.as_bytes(), entry: EMPTY_ENTRY }
            }
            VerdictState::NotLogged { digest } => {
                AsVerdict { state: AsVerdictState::NotLogged, actual: *digest.as_bytes(), entry: EMPTY_ENTRY }
            }
        };
        Ok(())
    })
}
