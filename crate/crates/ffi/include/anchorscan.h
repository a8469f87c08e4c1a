#ifndef ANCHORSCAN_H
#define ANCHORSCAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AsStatus {
  AS_STATUS_OK = 0,
  AS_STATUS_NULL_ARGUMENT = 1,
  AS_STATUS_INVALID_ARGUMENT = 2,
  AS_STATUS_INVALID_REPORT = 3,
  AS_STATUS_LEDGER = 4,
  AS_STATUS_UNKNOWN_TX = 5,
  AS_STATUS_PANIC = 99,
} AsStatus;

typedef enum AsTxState {
  AS_TX_STATE_PENDING = 0,
  AS_TX_STATE_PROPAGATED = 1,
  AS_TX_STATE_CONFIRMED = 2,
  AS_TX_STATE_REVERTED = 3,
} AsTxState;

/**
 * Values match the CLI exit codes for the same outcome.
 */
typedef enum AsVerdictState {
  AS_VERDICT_STATE_INTACT = 0,
  AS_VERDICT_STATE_TAMPERED = 2,
  AS_VERDICT_STATE_NOT_LOGGED = 3,
} AsVerdictState;

/**
 * Opaque handle to a simulated chain with the log contract deployed.
 */
typedef struct AsSimLedger AsSimLedger;

/**
 * Transaction snapshot. Timestamps are unix ms, 0 when not yet reached.
 */
typedef struct AsTx {
  uint8_t tx_id[32];
  uint8_t payload_hash[32];
  uint8_t auditor[20];
  enum AsTxState state;
  /**
   * Set when the transaction reverted because the hash was already stored.
   */
  bool duplicate;
  uint64_t submitted_at;
  uint64_t propagated_at;
  uint64_t confirmed_at;
} AsTx;

typedef struct AsLogEntry {
  uint8_t report_hash[32];
  /**
   * Block time, unix seconds.
   */
  uint64_t timestamp;
  uint8_t auditor[20];
  bool verified;
} AsLogEntry;

typedef struct AsVerdict {
  enum AsVerdictState state;
  /**
   * Digest recomputed from the supplied bytes.
   */
  uint8_t actual[32];
  /**
   * The stored entry; meaningful only when `state` is `Intact`.
   */
  struct AsLogEntry entry;
} AsVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *as_last_error(void);

/**
 * SHA-256 of `len` bytes at `data`.
 *
 * # Safety
 * `data` must point to `len` readable bytes (or may be null when `len` is 0)
 * and `out` must point to 32 writable bytes.
 */
enum AsStatus as_sha256(const uint8_t *data, size_t len, uint8_t (*out)[32]);

/**
 * Parse report JSON, check its invariants and write its canonical encoding
 * to a new buffer. Release it with [`as_bytes_free`].
 *
 * # Safety
 * `json` must point to `len` readable bytes; `out` and `out_len` must be
 * writable.
 */
enum AsStatus as_report_canonicalize(const uint8_t *json,
                                     size_t len,
                                     uint8_t **out,
                                     size_t *out_len);

/**
 * Free a buffer returned by [`as_report_canonicalize`].
 *
 * # Safety
 * `data` and `len` must come from one successful call and not be freed twice.
 */
void as_bytes_free(uint8_t *data, size_t len);

/**
 * Digest of the canonical encoding of report JSON.
 *
 * # Safety
 * `json` must point to `len` readable bytes and `out` to 32 writable bytes.
 */
enum AsStatus as_report_hash(const uint8_t *json, size_t len, uint8_t (*out)[32]);

/**
 * Create a simulated ledger. `config_json` is a chain configuration object
 * or null for the default testnet profile with seed 0.
 *
 * # Safety
 * `config_json` must be null or a NUL-terminated string; `out` must be
 * writable.
 */
enum AsStatus as_sim_ledger_new(const char *config_json, struct AsSimLedger **out);

/**
 * # Safety
 * `ledger` must be null or a handle from [`as_sim_ledger_new`] not yet freed.
 */
void as_sim_ledger_free(struct AsSimLedger *ledger);

/**
 * Submit `hash` for anchoring by `auditor`. A duplicate of a stored hash
 * returns a transaction already in the reverted state.
 *
 * # Safety
 * Pointers must be valid for their array sizes; `ledger` must be live.
 */
enum AsStatus as_sim_ledger_submit(const struct AsSimLedger *ledger,
                                   const uint8_t (*hash)[32],
                                   const uint8_t (*auditor)[20],
                                   struct AsTx *out);

/**
 * Current state of a submitted transaction.
 *
 * # Safety
 * Pointers must be valid for their array sizes; `ledger` must be live.
 */
enum AsStatus as_sim_ledger_tx(const struct AsSimLedger *ledger,
                               const uint8_t (*tx_id)[32],
                               struct AsTx *out);

/**
 * Run the clock until the transaction is confirmed or reverted.
 *
 * # Safety
 * Pointers must be valid for their types; `ledger` must be live.
 */
enum AsStatus as_sim_ledger_await_final(const struct AsSimLedger *ledger,
                                        const uint8_t (*tx_id)[32],
                                        struct AsTx *out);

/**
 * Advance the virtual clock by `delta_ms`, applying due lifecycle events.
 *
 * # Safety
 * `ledger` must be live.
 */
enum AsStatus as_sim_ledger_advance(const struct AsSimLedger *ledger, uint64_t delta_ms);

/**
 * Run the clock until no transaction is in flight.
 *
 * # Safety
 * `ledger` must be live.
 */
enum AsStatus as_sim_ledger_settle(const struct AsSimLedger *ledger);

/**
 * Virtual clock, unix ms.
 *
 * # Safety
 * `ledger` must be live and `out` writable.
 */
enum AsStatus as_sim_ledger_now_ms(const struct AsSimLedger *ledger, uint64_t *out);

/**
 * Look up the stored entry for `hash`. `found` is false when absent.
 *
 * # Safety
 * Pointers must be valid for their types; `ledger` must be live.
 */
enum AsStatus as_sim_ledger_get_log(const struct AsSimLedger *ledger,
                                    const uint8_t (*hash)[32],
                                    bool *found,
                                    struct AsLogEntry *out);

/**
 * Verify report bytes against the ledger and, when `expected` is not null,
 * against the digest recorded for them.
 *
 * # Safety
 * `data` must point to `len` readable bytes, `expected` must be null or
 * point to 32 bytes, `out` must be writable and `ledger` live.
 */
enum AsStatus as_verify(const struct AsSimLedger *ledger,
                        const uint8_t *data,
                        size_t len,
                        const uint8_t (*expected)[32],
                        struct AsVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANCHORSCAN_H */
