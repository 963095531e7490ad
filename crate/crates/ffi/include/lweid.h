#ifndef LWEID_H
#define LWEID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LWEID_SCHEME_STERN 1

#define LWEID_SCHEME_CVE 2

/**
 * Verdict code reported before a session has finished.
 */
#define LWEID_VERDICT_PENDING -1

typedef enum LweidStatus {
  LWEID_STATUS_OK = 0,
  LWEID_STATUS_NULL_POINTER = 1,
  LWEID_STATUS_INVALID_PARAMS = 2,
  LWEID_STATUS_MALFORMED = 3,
  LWEID_STATUS_BUFFER_TOO_SMALL = 4,
  LWEID_STATUS_WRONG_KEY_KIND = 5,
  LWEID_STATUS_PROTOCOL = 6,
  LWEID_STATUS_INTERNAL = 99,
} LweidStatus;

/**
 * A key file: public key, optionally with the secret.
 */
typedef struct LweidKey LweidKey;

typedef struct LweidProver LweidProver;

typedef struct LweidVerifier LweidVerifier;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread. Valid until the next failing
 * call on the same thread.
 */
const char *lweid_last_error(void);

/**
 * Generates a key pair from a master seed. Seed and commitment lengths are
 * in bits; `rounds` is stored in the key as the session default.
 *
 * # Safety
 * `seed` must point to `seed_len` readable bytes; `out` must be writable.
 */
enum LweidStatus lweid_keygen(uint8_t scheme,
                              size_t n,
                              size_t m,
                              uint16_t q,
                              double sigma,
                              uint32_t rounds,
                              uint16_t seed_bits,
                              uint16_t com_bits,
                              const uint8_t *seed,
                              size_t seed_len,
                              struct LweidKey **out);

/**
 * Parses a key file image.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
enum LweidStatus lweid_key_load(const uint8_t *data, size_t len, struct LweidKey **out);

/**
 * Serializes a key in the key file format.
 *
 * # Safety
 * `key` must be a live handle; `buf` must hold `cap` bytes or be null.
 */
enum LweidStatus lweid_key_serialize(struct LweidKey *key,
                                     uint8_t *buf,
                                     size_t cap,
                                     size_t *written);

/**
 * New handle holding only the public part of `key`.
 *
 * # Safety
 * `key` must be a live handle; `out` must be writable.
 */
enum LweidStatus lweid_key_public(struct LweidKey *key, struct LweidKey **out);

/**
 * 1 if the key carries secret material, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `key` must be a live handle or null.
 */
int32_t lweid_key_has_secret(const struct LweidKey *key);

/**
 * # Safety
 * `key` must be a handle from this library or null; it is invalid afterwards.
 */
void lweid_key_free(struct LweidKey *key);

/**
 * Verifier for `rounds` rounds (0: the key's default). Refuses keys that
 * carry a secret. The session hello is queued as the first output.
 *
 * # Safety
 * `key` must be a live handle; `coins` must point to `coins_len` bytes.
 */
enum LweidStatus lweid_verifier_new(struct LweidKey *key,
                                    uint32_t rounds,
                                    const uint8_t *coins,
                                    size_t coins_len,
                                    struct LweidVerifier **out);

/**
 * Feeds one or more complete frames from the prover. Unreadable input ends
 * the session with a malformed verdict rather than failing the call.
 *
 * # Safety
 * `v` must be a live handle; `frame` must point to `len` bytes.
 */
enum LweidStatus lweid_verifier_receive(struct LweidVerifier *v, const uint8_t *frame, size_t len);

/**
 * Ends the session because the prover went silent.
 *
 * # Safety
 * `v` must be a live handle.
 */
enum LweidStatus lweid_verifier_timeout(struct LweidVerifier *v);

/**
 * Bytes queued for the prover.
 *
 * # Safety
 * `v` must be a live handle or null.
 */
size_t lweid_verifier_output_len(const struct LweidVerifier *v);

/**
 * Moves the queued frames into `buf`; the queue is emptied on success.
 *
 * # Safety
 * `v` must be a live handle; `buf` must hold `cap` bytes or be null.
 */
enum LweidStatus lweid_verifier_take_output(struct LweidVerifier *v,
                                            uint8_t *buf,
                                            size_t cap,
                                            size_t *written);

/**
 * Session verdict code (0 accept, 1 malformed, 2 commitment, 3 weight,
 * 4 timeout) or `LWEID_VERDICT_PENDING`.
 *
 * # Safety
 * `v` must be a live handle or null.
 */
int32_t lweid_verifier_verdict(const struct LweidVerifier *v);

/**
 * # Safety
 * `v` must be a handle from this library or null.
 */
void lweid_verifier_free(struct LweidVerifier *v);

/**
 * Prover for a secret-bearing key. `master` seeds its randomness.
 *
 * # Safety
 * `key` must be a live handle; `master` must point to `master_len` bytes.
 */
enum LweidStatus lweid_prover_new(struct LweidKey *key,
                                  const uint8_t *master,
                                  size_t master_len,
                                  struct LweidProver **out);

/**
 * Feeds one or more complete frames from the verifier.
 *
 * # Safety
 * `p` must be a live handle; `frame` must point to `len` bytes.
 */
enum LweidStatus lweid_prover_receive(struct LweidProver *p, const uint8_t *frame, size_t len);

/**
 * # Safety
 * `p` must be a live handle or null.
 */
size_t lweid_prover_output_len(const struct LweidProver *p);

/**
 * # Safety
 * `p` must be a live handle; `buf` must hold `cap` bytes or be null.
 */
enum LweidStatus lweid_prover_take_output(struct LweidProver *p,
                                          uint8_t *buf,
                                          size_t cap,
                                          size_t *written);

/**
 * # Safety
 * `p` must be a live handle or null.
 */
int32_t lweid_prover_verdict(const struct LweidProver *p);

/**
 * # Safety
 * `p` must be a handle from this library or null.
 */
void lweid_prover_free(struct LweidProver *p);

/**
 * Smallest r with per-round error^r ≤ `target`, decided exactly.
 *
 * # Safety
 * `out` must be writable.
 */
enum LweidStatus lweid_rounds_for_target(uint8_t scheme, uint16_t q, double target, uint32_t *out);

/**
 * Per-round soundness error as a double; NaN for an unknown scheme.
 */
double lweid_per_round_error(uint8_t scheme, uint16_t q);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LWEID_H */
