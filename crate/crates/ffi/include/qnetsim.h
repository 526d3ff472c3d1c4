#ifndef QNETSIM_H
#define QNETSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>

typedef enum QnsStatus {
  QNS_STATUS_OK = 0,
  QNS_STATUS_NULL_ARGUMENT = 1,
  QNS_STATUS_INVALID_UTF8 = 2,
  QNS_STATUS_PARSE = 3,
  QNS_STATUS_IO = 4,
  // The scenario is well formed but not runnable.
  QNS_STATUS_SEMANTIC = 5,
  QNS_STATUS_ENGINE = 6,
  QNS_STATUS_PANIC = 7,
} QnsStatus;

// Result of running a scenario. Opaque to C.
typedef struct QnsReport QnsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *qns_last_error_message(void);

// Library version as a static string.
const char *qns_version(void);

// Free a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or came from this library and has not been freed.
void qns_string_free(char *s);

// ‖ρ_E − I/d_E‖₁ upper bound for `n_e` observed and `n_b` hidden qubits.
double qns_decoupling_bound(uintptr_t n_e, uintptr_t n_b);

// Check a scenario file without running it. On success `*diagnostics`
// (if not null) receives a JSON object to free with [`qns_string_free`].
//
// # Safety
// `path` is a valid NUL-terminated string; `diagnostics` is null or
// writable.
enum QnsStatus qns_validate(const char *path, char **diagnostics);

// Run a scenario file and write its artifacts. `out_dir` may be null to
// use the scenario's own choice; `seed` overrides the scenario seed when
// `override_seed` is true. A run whose checks fail still returns
// `QNS_STATUS_OK`; see [`qns_report_passed`].
//
// # Safety
// `path` is a valid NUL-terminated string, `out_dir` is null or one, and
// `report` is writable.
enum QnsStatus qns_run_scenario(const char *path,
                                const char *out_dir,
                                bool override_seed,
                                uint64_t seed,
                                struct QnsReport **report);

// Whether every check of the run passed. False for null.
//
// # Safety
// `report` is null or a live report.
bool qns_report_passed(const struct QnsReport *report);

// Process exit code the command-line tool would use for this run.
//
// # Safety
// `report` is null or a live report.
int32_t qns_report_exit_code(const struct QnsReport *report);

// The report as pretty JSON; free with [`qns_string_free`]. Null for a
// null report.
//
// # Safety
// `report` is null or a live report.
char *qns_report_json(const struct QnsReport *report);

// Directory the artifacts were written to, owned by the report.
//
// # Safety
// `report` is null or a live report.
const char *qns_report_out_dir(const struct QnsReport *report);

// # Safety
// `report` is null or a live report that is not used afterwards.
void qns_report_free(struct QnsReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QNETSIM_H */
