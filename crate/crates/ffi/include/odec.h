#ifndef ODEC_H
#define ODEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OdecStatus {
  ODEC_STATUS_OK = 0,
  ODEC_STATUS_NULL_POINTER = 1,
  ODEC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The episode is over; reset before stepping again.
   */
  ODEC_STATUS_EPISODE_OVER = 3,
  /**
   * Output buffer too small; the required length was written.
   */
  ODEC_STATUS_BUFFER_TOO_SMALL = 4,
  ODEC_STATUS_IO = 5,
  ODEC_STATUS_RUNTIME = 6,
} OdecStatus;

typedef enum OdecMode {
  ODEC_MODE_OPEN = 0,
  ODEC_MODE_CLOSED = 1,
} OdecMode;

/**
 * A running environment.
 */
typedef struct OdecEnv OdecEnv;

/**
 * Trained policies with their own sampling RNG.
 */
typedef struct OdecPolicy OdecPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty if none. Valid until the
 * next failing call on this thread.
 */
const char *odec_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *odec_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void odec_string_free(char *s);

/**
 * Urban firefighting with `max_agents` agents and default rewards.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OdecStatus odec_env_new_uff(size_t max_agents, enum OdecMode mode, struct OdecEnv **out);

/**
 * Robot-human assembly with default rewards.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OdecStatus odec_env_new_assembly(enum OdecMode mode, struct OdecEnv **out);

/**
 * # Safety
 * `env` must come from `odec_env_new_*` and not have been freed. Null is ignored.
 */
void odec_env_free(struct OdecEnv *env);

/**
 * Starts an episode.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum OdecStatus odec_env_reset(struct OdecEnv *env, uint64_t seed);

/**
 * Current team id and its number of members.
 *
 * # Safety
 * All pointers must be valid.
 */
enum OdecStatus odec_env_team(struct OdecEnv *env, uint32_t *team, size_t *members);

/**
 * Applies one action per current team member, in ascending agent order.
 *
 * # Safety
 * `actions` must point to `len` values; other pointers must be valid.
 */
enum OdecStatus odec_env_step(struct OdecEnv *env,
                              const size_t *actions,
                              size_t len,
                              double *reward,
                              bool *done);

/**
 * Text frame of the current state; free with `odec_string_free`.
 *
 * # Safety
 * `env` and `out` must be valid.
 */
enum OdecStatus odec_env_render(struct OdecEnv *env, char **out);

/**
 * Loads a policy checkpoint. `seed` seeds stochastic action sampling.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OdecStatus odec_policy_load(const char *path, uint64_t seed, struct OdecPolicy **out);

/**
 * # Safety
 * `policy` must come from `odec_policy_load` and not have been freed. Null is ignored.
 */
void odec_policy_free(struct OdecPolicy *policy);

/**
 * Chooses the current team's joint action in `env`: each member's most likely action
 * when `greedy`, otherwise a sample. Writes `*len` actions into `actions`, which holds
 * `capacity` values.
 *
 * # Safety
 * `actions` must hold `capacity` values; other pointers must be valid.
 */
enum OdecStatus odec_policy_act(struct OdecPolicy *policy,
                                struct OdecEnv *env,
                                bool greedy,
                                size_t *actions,
                                size_t capacity,
                                size_t *len);

/**
 * Runs the command-line interface with `argc` arguments (the first is the program
 * name) and returns its exit code: 0 success, 1 invalid input, 2 runtime failure.
 *
 * # Safety
 * `argv` must point to `argc` NUL-terminated strings.
 */
int odec_cli_run(int argc, const char *const *argv);

/**
 * Runs the built-in checks; `failed` receives the number that failed.
 *
 * # Safety
 * `failed` must be a valid pointer.
 */
enum OdecStatus odec_selftest(size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODEC_H */
