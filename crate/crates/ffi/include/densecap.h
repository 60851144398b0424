#ifndef DENSECAP_H
#define DENSECAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_UTF8 = 2,
  DC_STATUS_PARSE = 3,
  DC_STATUS_IO = 4,
  DC_STATUS_INVALID_ARGUMENT = 5,
  DC_STATUS_DIMENSION_MISMATCH = 6,
  DC_STATUS_INVARIANT = 7,
  DC_STATUS_NUMERICAL = 8,
  DC_STATUS_GUARD = 9,
  DC_STATUS_NOT_CONVERGED = 10,
  DC_STATUS_NOT_A_PROGRAM = 11,
  DC_STATUS_PANIC = 12,
} DcStatus;

/**
 * Outcome of a capacity computation.
 */
typedef struct DcCapacity DcCapacity;

/**
 * Quantum channel in Kraus form.
 */
typedef struct DcChannel DcChannel;

/**
 * Shared bipartite state with a designated sender side.
 */
typedef struct DcState DcState;

/**
 * Optimizer settings; obtain defaults from [`dc_options_default`].
 */
typedef struct DcOptions {
  size_t restarts;
  size_t max_iters;
  uint64_t seed;
} DcOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dc_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *dc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void dc_string_free(char *s);

struct DcOptions dc_options_default(void);

/**
 * Parses a state document (`dims`, `matrix`, optional `sender_factors`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DcStatus dc_state_from_json(const char *json, struct DcState **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DcStatus dc_state_from_file(const char *path, struct DcState **out);

/**
 * # Safety
 * `state` must be null or a handle from this library, freed at most once.
 */
void dc_state_free(struct DcState *state);

/**
 * Writes the sender and receiver dimensions.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_state_dims(const struct DcState *state, size_t *sender, size_t *receiver);

/**
 * Von Neumann entropy of the whole state, in bits.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_state_entropy(const struct DcState *state, double *out);

/**
 * `H(B) - H(AB)` with A the sender side.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_state_coherent_information(const struct DcState *state, double *out);

/**
 * Parses a channel document (`d_in`, `d_out`, `kraus`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DcStatus dc_channel_from_json(const char *json, struct DcChannel **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DcStatus dc_channel_from_file(const char *path, struct DcChannel **out);

/**
 * `rho -> (1 - p) rho + p I / d`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum DcStatus dc_channel_depolarizing(size_t d, double p, struct DcChannel **out);

/**
 * # Safety
 * `channel` must be null or a handle from this library, freed at most once.
 */
void dc_channel_free(struct DcChannel *channel);

/**
 * Noiseless dense-coding capacity with a sender alphabet of size `d`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be null for defaults.
 */
enum DcStatus dc_capacity(const struct DcState *state,
                          size_t d,
                          const struct DcOptions *opts,
                          struct DcCapacity **out);

/**
 * Capacity when the encoded system crosses `channel`; `m` is the
 * ensemble size searched.
 *
 * # Safety
 * Pointers must be valid; `opts` may be null for defaults.
 */
enum DcStatus dc_noisy_capacity(const struct DcChannel *channel,
                                const struct DcState *state,
                                size_t m,
                                const struct DcOptions *opts,
                                struct DcCapacity **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_capacity_value(const struct DcCapacity *result, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_capacity_converged(const struct DcCapacity *result, bool *out);

/**
 * Full result as JSON; release with [`dc_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_capacity_to_json(const struct DcCapacity *result, char **out);

/**
 * # Safety
 * `result` must be null or a handle from this library, freed at most once.
 */
void dc_capacity_free(struct DcCapacity *result);

/**
 * Upper bound `log2 d + D(rho || sigma)`. `certified` reports whether
 * `sigma` is PPT across the sender/receiver cut.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_ree_bound(const struct DcState *state,
                           size_t d,
                           const struct DcState *sigma,
                           double *bound,
                           bool *certified);

/**
 * `C(rho (x) sigma) - C(rho) - C(sigma)`.
 *
 * # Safety
 * Pointers must be valid; `opts` may be null for defaults.
 */
enum DcStatus dc_additivity_gap(const struct DcState *rho,
                                size_t d1,
                                const struct DcState *sigma,
                                size_t d2,
                                const struct DcOptions *opts,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DENSECAP_H */
