#ifndef MDIQPQ_H
#define MDIQPQ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MdiqpqStatus {
  MDIQPQ_STATUS_OK = 0,
  MDIQPQ_STATUS_NULL_POINTER = 1,
  MDIQPQ_STATUS_INVALID_ARGUMENT = 2,
  MDIQPQ_STATUS_DOMAIN = 3,
  MDIQPQ_STATUS_RESTART = 4,
  MDIQPQ_STATUS_OUT_OF_RANGE = 5,
  MDIQPQ_STATUS_INTERNAL = 6,
} MdiqpqStatus;

typedef enum MdiqpqStrategy {
  MDIQPQ_STRATEGY_HONEST = 0,
  MDIQPQ_STRATEGY_MIDDLE_ATTACK = 1,
} MdiqpqStrategy;

/**
 * Protocol configuration.
 */
typedef struct MdiqpqParams MdiqpqParams;

/**
 * Result of one simulated key distribution.
 */
typedef struct MdiqpqRun MdiqpqRun;

/**
 * Bell-outcome probability table, rows Alice, columns Bob.
 */
typedef struct MdiqpqTable MdiqpqTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library from the same thread.
 */
const char *mdiqpq_last_error(void);

/**
 * Qutrit rotated ensemble with angles in radians.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum MdiqpqStatus mdiqpq_params_qutrit(double gamma1, double gamma2, struct MdiqpqParams **out);

/**
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum MdiqpqStatus mdiqpq_params_qubit(double theta, struct MdiqpqParams **out);

/**
 * Qutrit Fourier ensemble.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum MdiqpqStatus mdiqpq_params_fourier(struct MdiqpqParams **out);

/**
 * # Safety
 * `params` must be null or a handle from this library not yet freed.
 */
void mdiqpq_params_free(struct MdiqpqParams *params);

/**
 * Honest conclusive rate given the target outcome.
 *
 * # Safety
 * `params` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_honest_rate(const struct MdiqpqParams *params, double *out);

/**
 * Conclusive rate when Bob sends middle states. Not defined for the
 * Fourier ensemble.
 *
 * # Safety
 * `params` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_attack_rate(const struct MdiqpqParams *params, double *out);

/**
 * Probability that an honest round yields the target outcome.
 *
 * # Safety
 * `params` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_retention_probability(const struct MdiqpqParams *params, double *out);

/**
 * Target-outcome table of Alice's states against Bob's honest states, or
 * against his middle states when `middle` is set.
 *
 * # Safety
 * `params` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_table_new(const struct MdiqpqParams *params,
                                   bool middle,
                                   bool normalized,
                                   struct MdiqpqTable **out);

/**
 * # Safety
 * `table` must be null or a live handle.
 */
size_t mdiqpq_table_rows(const struct MdiqpqTable *table);

/**
 * # Safety
 * `table` must be null or a live handle.
 */
size_t mdiqpq_table_cols(const struct MdiqpqTable *table);

/**
 * # Safety
 * `table` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_table_get(const struct MdiqpqTable *table,
                                   size_t row,
                                   size_t col,
                                   double *out);

/**
 * # Safety
 * `table` must be null or a handle from this library not yet freed.
 */
void mdiqpq_table_free(struct MdiqpqTable *table);

/**
 * Simulates `rounds` seeded rounds of key distribution.
 *
 * # Safety
 * `params` must be null or a live handle; `out` null or writable;
 * `strategy` one of the declared enumerators.
 */
enum MdiqpqStatus mdiqpq_run_sift(const struct MdiqpqParams *params,
                                  uint64_t rounds,
                                  enum MdiqpqStrategy strategy,
                                  uint64_t seed,
                                  struct MdiqpqRun **out);

/**
 * Rounds that produced the target outcome.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t mdiqpq_run_retained(const struct MdiqpqRun *run);

/**
 * Conclusive fraction of the retained rounds. Fails with `Restart` when
 * nothing was retained.
 *
 * # Safety
 * `run` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_run_conclusive_rate(const struct MdiqpqRun *run, double *out);

/**
 * Discloses a random fraction of the usable conclusive positions and
 * writes the observed error rate. The disclosed positions stay marked on
 * the run.
 *
 * # Safety
 * `run` must be null or a live handle; `out` null or writable.
 */
enum MdiqpqStatus mdiqpq_run_estimate_qber(struct MdiqpqRun *run,
                                           double test_fraction,
                                           uint64_t seed,
                                           double *out);

/**
 * # Safety
 * `run` must be null or a handle from this library not yet freed.
 */
void mdiqpq_run_free(struct MdiqpqRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDIQPQ_H */
