/* C interface for the qsu2 library. */

#ifndef QSU2_H
#define QSU2_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum QsStatus {
  QS_STATUS_OK = 0,
  // A verification or comparison failed its tolerance.
  QS_STATUS_CHECK_FAILED = 1,
  // Structurally invalid parameters (q outside (0,1), a +- b <= 0, ...).
  QS_STATUS_INVALID_PARAMS = 2,
  // Evaluation point too close to a pole of the zeta function.
  QS_STATUS_POLE_HIT = 3,
  // Residue requested at a double pole (b = 0).
  QS_STATUS_DOUBLE_POLE = 4,
  // The gamma factor has a pole at the requested point.
  QS_STATUS_GAMMA_POLE = 5,
  // Malformed expression text.
  QS_STATUS_PARSE_ERROR = 6,
  // A required pointer argument was null.
  QS_STATUS_NULL_POINTER = 7,
} QsStatus;

// Opaque evaluation context: deformation parameter and working precision.
typedef struct QsCtx QsCtx;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a context for q = q_num/q_den at the given precision (bits).
// Returns null when the parameters are invalid (q outside (0,1), zero
// denominator, precision below 64).
struct QsCtx *qs_ctx_new(int64_t q_num, int64_t q_den, uint32_t prec);

// Free a context created by `qs_ctx_new`. Null is accepted and ignored.
//
// # Safety
// `ctx` must be a pointer previously returned by `qs_ctx_new` and not yet
// freed.
void qs_ctx_free(struct QsCtx *ctx);

// Evaluate the closed-form zeta function at z = z_re + i z_im for the
// weight exponents (a, b); writes value and tail bound.
//
// # Safety
// `ctx` must be a live context; output pointers must be valid or null
// (null outputs are an error).
enum QsStatus qs_zeta(const struct QsCtx *ctx,
                      double a,
                      double b,
                      double z_re,
                      double z_im,
                      double *out_re,
                      double *out_im,
                      double *out_tail);

// Spectral dimension a + |b| of the weight; fails when a +- b <= 0.
//
// # Safety
// `out_n` must be a valid pointer.
enum QsStatus qs_spectral_dimension(double a, double b, double *out_n);

// Residue of the zeta function at the real point z0 (optionally weighted by
// the gamma function there). Writes the residue and the measured error
// bound of the internal numeric-limit cross-check.
//
// # Safety
// `ctx` must be a live context; `out_re` and `out_err` must be valid.
enum QsStatus qs_residue(const struct QsCtx *ctx,
                         double a,
                         double b,
                         double z0,
                         int gamma_weighted,
                         double *out_re,
                         double *out_err);

// Value of the Haar state on an algebra element given in the plain-text
// monomial syntax (e.g. "b c" or "a^2 b + -1/4 d").
//
// # Safety
// `ctx` must be a live context; `expr` must be a NUL-terminated string;
// `out` must be valid.
enum QsStatus qs_haar_state(const struct QsCtx *ctx, const char *expr, double *out);

// Compare the normalized non-commutative integral of an expression against
// the Haar state at weight exponent a: writes both values and a pass flag
// for the given tolerance. Returns `CheckFailed` when the comparison
// exceeds the tolerance.
//
// # Safety
// As `qs_haar_state`; `out_phi`, `out_h`, `out_pass` must be valid.
enum QsStatus qs_haar_check(const struct QsCtx *ctx,
                            const char *expr,
                            double a,
                            double tol,
                            double *out_phi,
                            double *out_h,
                            int *out_pass);

// Scan weight exponents (with b = 1) for the root of the residue two steps
// below the spectral dimension. Writes the root location; returns
// `CheckFailed` when no sign change lies in the range.
//
// # Safety
// `ctx` must be a live context; `out_root` must be valid.
enum QsStatus qs_scan_a2(const struct QsCtx *ctx, double a_min, double a_max, double *out_root);

// Library version as a static NUL-terminated string.
const char *qs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSU2_H */
