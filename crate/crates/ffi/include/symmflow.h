#ifndef SYMMFLOW_H
#define SYMMFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; the values 2 to 5 match the command-line exit codes.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_PARSE_ERROR = 2,
  SF_STATUS_INCONSISTENT = 3,
  SF_STATUS_INVALID_CONFIG = 4,
  SF_STATUS_VERIFICATION_FAILED = 5,
  SF_STATUS_NULL_POINTER = 10,
  SF_STATUS_INVALID_UTF8 = 11,
  SF_STATUS_PANIC = 12,
} SfStatus;

/*
 Parsed expression; canonical form kept when it exists.
 */
typedef struct SfExpr SfExpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Free with
 [`sf_string_free`].
 */
char *sf_last_error_message(void);

/*
 Static version string.
 */
const char *sf_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void sf_string_free(char *s);

/*
 Parses `text`; on success `*out` receives a handle to free with
 [`sf_expr_free`].

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SfStatus sf_expr_parse(const char *text, struct SfExpr **out);

/*
 Canonical text of the expression (the parsed form when it has no
 canonical form).

 # Safety
 `expr` must come from [`sf_expr_parse`]; `out` must be valid.
 */
enum SfStatus sf_expr_to_string(const struct SfExpr *expr, char **out);

/*
 1 if the expression lies in the canonical fragment, else 0.

 # Safety
 `expr` must come from [`sf_expr_parse`] or be null.
 */
int32_t sf_expr_is_canonical(const struct SfExpr *expr);

/*
 Evaluates at `x`, `eps` with jet values `jets[0..n_jets]` (`y, y', …`).

 # Safety
 `jets` must point to `n_jets` doubles (or be null with `n_jets == 0`).
 */
enum SfStatus sf_expr_eval(const struct SfExpr *expr,
                           double x,
                           double eps,
                           const double *jets,
                           size_t n_jets,
                           double *out);

/*
 # Safety
 `expr` must be null or come from [`sf_expr_parse`], and not be used after.
 */
void sf_expr_free(struct SfExpr *expr);

/*
 Runs a command on a problem file given as JSON text. `options_json` may
 be null; keys: `selector`, `check`, `first_integral`, `solve`, `tol`,
 `grid` (`{start, end, step}`), `eps`.

 `*report_out` receives the JSON report whenever one was produced, which
 includes the `VerificationFailed` case.

 # Safety
 String arguments must be NUL-terminated (or null where allowed) and
 `report_out` must be valid.
 */
enum SfStatus sf_run_command(const char *command,
                             const char *problem_json,
                             const char *options_json,
                             char **report_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMMFLOW_H */
