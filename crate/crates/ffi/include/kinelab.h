#ifndef KINELAB_H
#define KINELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call; values 0–4 match the CLI exit codes.
 */
typedef enum KlStatus {
  KL_STATUS_OK = 0,
  /**
   * A verification law failed; the report is still produced.
   */
  KL_STATUS_VERIFICATION_FAILED = 1,
  KL_STATUS_INVALID_INPUT = 2,
  KL_STATUS_DEGENERATE = 3,
  KL_STATUS_BUDGET_EXCEEDED = 4,
  KL_STATUS_NULL_POINTER = 5,
  KL_STATUS_BUFFER_TOO_SMALL = 6,
  KL_STATUS_PANIC = 7,
} KlStatus;

/**
 * A parsed scene.
 */
typedef struct KlScene KlScene;

/**
 * Mean and standard error of one estimate.
 */
typedef struct KlEstimate {
  double mean;
  /**
   * Standard error (named to avoid the C `stderr` macro).
   */
  double std_error;
} KlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scene document; on success `*out` owns a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KlStatus kl_scene_from_json(const char *json, struct KlScene **out);

/**
 * Releases a scene handle; null is ignored.
 *
 * # Safety
 * `scene` must come from `kl_scene_from_json` and not be used afterwards.
 */
void kl_scene_free(struct KlScene *scene);

/**
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum KlStatus kl_scene_ambient_dim(const struct KlScene *scene, size_t *out);

/**
 * Invariant profile of one germ, seeded as the `invariants` command.
 *
 * `sigma` and `lambda_lim` receive `n + 1` entries (index 0..=n),
 * `lambda_loc` receives `n` entries (Λ^loc_1..=Λ^loc_n), where `n` is the
 * ambient dimension; each buffer must hold at least `len` entries with
 * `len ≥ n + 1`. Any of the output pointers may be null to skip it.
 *
 * # Safety
 * Non-null buffers must be valid for `len` writes.
 */
enum KlStatus kl_invariants(const struct KlScene *scene,
                            const char *germ,
                            uint64_t samples,
                            uint64_t seed,
                            struct KlEstimate *sigma,
                            struct KlEstimate *lambda_lim,
                            struct KlEstimate *lambda_loc,
                            size_t len,
                            struct KlEstimate *density);

/**
 * Runs every applicable law and returns the JSON report in `*out`
 * (release with `kl_string_free`). Returns `KL_STATUS_VERIFICATION_FAILED`
 * when any law fails; the report is written in that case too.
 *
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum KlStatus kl_verify_all_json(const struct KlScene *scene,
                                 uint64_t samples,
                                 uint64_t seed,
                                 char **out);

/**
 * Releases a string returned by the library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void kl_string_free(char *s);

/**
 * Message of the last failed call on this thread (empty after a success).
 * Valid until the next library call on the same thread.
 */
const char *kl_last_error(void);

/**
 * Volume of the unit sphere `S^k`.
 */
double kl_sphere_volume(size_t k);

/**
 * Volume of the unit ball `B^k`.
 */
double kl_ball_volume(size_t k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINELAB_H */
