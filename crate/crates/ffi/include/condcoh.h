#ifndef CONDCOH_H
#define CONDCOH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_ARGUMENT = 1,
  CC_STATUS_INVALID_UTF8 = 2,
  CC_STATUS_PARSE_ERROR = 3,
  CC_STATUS_INVALID_ARGUMENT = 4,
  CC_STATUS_UNKNOWN_RULE = 5,
  CC_STATUS_P_INCONSISTENT = 6,
  CC_STATUS_OVERFLOW = 7,
  CC_STATUS_ENGINE_ERROR = 8,
  CC_STATUS_PANIC = 9,
} CcStatus;

// A parsed problem file.
typedef struct CcProblem CcProblem;

// `num / den` with `den > 0`.
typedef struct CcRational {
  int64_t num;
  int64_t den;
} CcRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Empty when none. The
// pointer stays valid until the next failing call on the same thread.
const char *cc_last_error(void);

// Seed used by the command-line tool when none is given.
uint64_t cc_default_seed(void);

// Parses a problem file. On success `*out` owns a handle to free with
// [`cc_problem_free`].
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum CcStatus cc_problem_parse(const char *text, struct CcProblem **out);

// # Safety
// `problem` must come from [`cc_problem_parse`] and not be freed twice.
void cc_problem_free(struct CcProblem *problem);

// Whether the problem's assessments are jointly coherent.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum CcStatus cc_problem_is_coherent(const struct CcProblem *problem, bool *out);

// Runs every query and writes the report, text or JSON, to `*out`. The
// command-line exit code goes to `*exit_code`; query failures are part of
// the report, not of the returned status.
//
// # Safety
// `problem` must be a live handle; `exit_code` and `out` valid pointers.
enum CcStatus cc_problem_run(const struct CcProblem *problem,
                             uint64_t seed,
                             bool json,
                             int32_t *exit_code,
                             char **out);

// # Safety
// `s` must come from this library, or be null.
void cc_string_free(char *s);

// Decides a built-in inference rule, e.g. `"weak-transitivity"`. Fails with
// `InternalDisagreement` surfaced as an engine error if the three decision
// procedures differ.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum CcStatus cc_rule_p_entails(const char *name, uint64_t seed, bool *out);

// Lower and upper bounds `max(sum - n + 1, 0)` and `min` on the prevision
// of a conjunction of `n` conditionals with probabilities `xs`.
//
// # Safety
// `xs` must point to `n` values; `lo` and `hi` must be valid pointers.
enum CcStatus cc_frechet_bounds(const struct CcRational *xs,
                                size_t n,
                                struct CcRational *lo,
                                struct CcRational *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONDCOH_H */
