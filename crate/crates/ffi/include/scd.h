#ifndef SCD_H
#define SCD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScdStatus {
  SCD_STATUS_OK = 0,
  SCD_STATUS_NULL_POINTER = 1,
  SCD_STATUS_INVALID_UTF8 = 2,
  SCD_STATUS_PARSE_ERROR = 3,
  SCD_STATUS_UNKNOWN_BUILTIN = 4,
  SCD_STATUS_INVALID_INPUT = 5,
  SCD_STATUS_SUM_ERROR = 6,
  SCD_STATUS_OVERFLOW = 7,
  SCD_STATUS_PANIC = 8,
} ScdStatus;

typedef enum ScdVerdictKind {
  SCD_VERDICT_KIND_PROVED_ZERO = 0,
  SCD_VERDICT_KIND_NOT_ZERO = 1,
  SCD_VERDICT_KIND_OPEN = 2,
} ScdVerdictKind;

/**
 * A parsed set of chain families.
 */
typedef struct ScdFamilySet ScdFamilySet;

/**
 * Result of proving a family set against the target generating function.
 */
typedef struct ScdProofReport ScdProofReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses family-file text into a new set.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScdStatus scd_family_set_parse(const char *text, struct ScdFamilySet **out);

/**
 * Loads a bundled family set: `l1`, `l2` or `demo6`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScdStatus scd_family_set_builtin(const char *name, struct ScdFamilySet **out);

/**
 * # Safety
 * `set` must come from this library and not be freed twice. Null is a no-op.
 */
void scd_family_set_free(struct ScdFamilySet *set);

/**
 * Number of families in the set.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum ScdStatus scd_family_set_len(const struct ScdFamilySet *set, size_t *out);

/**
 * Instantiates the families at `n` and checks for a symmetric chain
 * decomposition of L(m, n). Instantiation defects count as a failed check;
 * their message is left in [`scd_last_error`].
 *
 * # Safety
 * Both pointers must be valid.
 */
enum ScdStatus scd_verify(const struct ScdFamilySet *set, uint32_t n, bool *out_pass);

/**
 * Sums the families and proves the result equal to the target generating
 * function. `budget_ms == 0` means no time limit.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum ScdStatus scd_prove(const struct ScdFamilySet *set,
                         uint64_t budget_ms,
                         struct ScdProofReport **out);

/**
 * # Safety
 * `report` must come from this library and not be freed twice. Null is a no-op.
 */
void scd_proof_report_free(struct ScdProofReport *report);

/**
 * # Safety
 * Both pointers must be valid.
 */
enum ScdStatus scd_proof_report_verdict(const struct ScdProofReport *report,
                                        enum ScdVerdictKind *out);

/**
 * Factor counts of the report. Any output pointer may be null.
 *
 * # Safety
 * `report` must be valid; non-null outputs must be writable.
 */
enum ScdStatus scd_proof_report_counts(const struct ScdProofReport *report,
                                       size_t *total,
                                       size_t *closed,
                                       size_t *open);

/**
 * The report as `Key=Value` lines. Free the string with [`scd_string_free`].
 *
 * # Safety
 * Both pointers must be valid.
 */
enum ScdStatus scd_proof_report_to_string(const struct ScdProofReport *report, char **out);

/**
 * # Safety
 * `s` must come from this library. Null is a no-op.
 */
void scd_string_free(char *s);

/**
 * |L(m, n)| = C(m + n, n).
 *
 * # Safety
 * `out` must be valid.
 */
enum ScdStatus scd_lattice_count(size_t m, uint32_t n, uint64_t *out);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *scd_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCD_H */
