#ifndef QSCHED_H
#define QSCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QschedStatus {
  QSCHED_STATUS_OK = 0,
  // Null pointer, bad UTF-8, unknown name or out-of-range parameter.
  QSCHED_STATUS_INVALID_ARGUMENT = 1,
  // Malformed instance, schedule or flag document.
  QSCHED_STATUS_PARSE_ERROR = 2,
  // The invariant suite flagged the run.
  QSCHED_STATUS_INVARIANT_VIOLATION = 3,
  // The exhaustive oracle was asked for more packets than it enumerates.
  QSCHED_STATUS_BUDGET_EXCEEDED = 4,
  // A Rust panic was caught at the boundary.
  QSCHED_STATUS_PANIC = 5,
} QschedStatus;

// An instance: capacity, packets, and any reference optimum.
typedef struct QschedInstance QschedInstance;

// The result of one simulation.
typedef struct QschedRun QschedRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or "" after a success.
// Valid until the next call into this library on the same thread.
const char *qsched_last_error(void);

// Library version as a static string.
const char *qsched_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or was returned by this library and not yet freed.
void qsched_string_free(char *s);

// Parses an instance document (JSON with `capacity` and `packets`).
//
// # Safety
// `json` is a NUL-terminated string; `out` is valid for one write.
enum QschedStatus qsched_instance_parse(const char *json, struct QschedInstance **out);

// Builds an instance from a JSON object of generator flags, for example
// `{"family": "best-effort-lb", "b": 4, "eps": "1/4"}`. Families:
// `edf-nemesis`, `best-effort-lb`, `greedy-lb`, `random`. `seed` is used
// by `random` when the flags carry none.
//
// # Safety
// `flags_json` is a NUL-terminated string; `out` is valid for one write.
enum QschedStatus qsched_instance_generate(const char *flags_json,
                                           uint64_t seed,
                                           struct QschedInstance **out);

// # Safety
// `instance` is null or a live handle; it must not be used afterwards.
void qsched_instance_free(struct QschedInstance *instance);

// Number of packets, or 0 for a null handle.
//
// # Safety
// `instance` is null or a live handle.
size_t qsched_instance_len(const struct QschedInstance *instance);

// Buffer capacity, or 0 for a null handle.
//
// # Safety
// `instance` is null or a live handle.
size_t qsched_instance_capacity(const struct QschedInstance *instance);

// Serializes the instance in the same JSON format `qsched_instance_parse`
// reads.
//
// # Safety
// `instance` is a live handle; `out` is valid for one write.
enum QschedStatus qsched_instance_to_json(const struct QschedInstance *instance, char **out);

// The certified reference optimum carried by generated instances.
// `InvalidArgument` when the instance has none.
//
// # Safety
// `instance` is a live handle; `out` is valid for one write.
enum QschedStatus qsched_instance_reference_weight(const struct QschedInstance *instance,
                                                   char **out);

// Runs `algorithm` (`me`, `rme`, `edf`, `greedy`, `offline-greedy`,
// `oracle`). `alpha` and `gamma` may be null for the defaults; they accept
// decimals, `n/d`, `phi`, `1/phi` and `1/phi^2`. With `check` non-zero the
// invariant suite runs; violations are kept on the run and also reported
// as `InvariantViolation`, in which case `*out` is still written.
//
// # Safety
// String arguments are null (where allowed) or NUL-terminated; `instance`
// is a live handle; `out` is valid for one write.
enum QschedStatus qsched_simulate(const struct QschedInstance *instance,
                                  const char *algorithm,
                                  const char *alpha,
                                  const char *gamma,
                                  uint64_t seed,
                                  int32_t check,
                                  struct QschedRun **out);

// # Safety
// `run` is null or a live handle; it must not be used afterwards.
void qsched_run_free(struct QschedRun *run);

// Total delivered weight as an exact string.
//
// # Safety
// `run` is a live handle; `out` is valid for one write.
enum QschedStatus qsched_run_total_weight(const struct QschedRun *run, char **out);

// Total delivered weight rounded to the nearest double, or NaN for null.
//
// # Safety
// `run` is null or a live handle.
double qsched_run_total_weight_f64(const struct QschedRun *run);

// Number of packets sent, or 0 for null.
//
// # Safety
// `run` is null or a live handle.
size_t qsched_run_sent(const struct QschedRun *run);

// Number of invariant violations recorded, or 0 for null.
//
// # Safety
// `run` is null or a live handle.
size_t qsched_run_violations(const struct QschedRun *run);

// The transmission log as CSV with header `step,packet_id,weight`.
//
// # Safety
// `run` is a live handle; `out` is valid for one write.
enum QschedStatus qsched_run_log_csv(const struct QschedRun *run, char **out);

// Offline optimum by `method`: `oracle` (exhaustive, at most 18 packets)
// or `offline-greedy` (polynomial, a lower bound in general).
//
// # Safety
// `instance` is a live handle; `method` is NUL-terminated; `out` is valid
// for one write.
enum QschedStatus qsched_offline_opt(const struct QschedInstance *instance,
                                     const char *method,
                                     char **out);

// Checks a schedule (CSV `step,packet_id[,weight]` or a JSON list of
// `{step, packet}`) against the instance. `*ok` becomes 1 when it
// verifies and 0 otherwise; `listing`, when not null, receives "ok" or the
// violations joined by "; ".
//
// # Safety
// `instance` is a live handle; `schedule` is NUL-terminated; `ok` is valid
// for one write; `listing` is null or valid for one write.
enum QschedStatus qsched_verify(const struct QschedInstance *instance,
                                const char *schedule,
                                int32_t *ok,
                                char **listing);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSCHED_H */
