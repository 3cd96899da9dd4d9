/* C ABI for the perturba homological perturbation library. Generated by cbindgen; do not edit. */

#ifndef PERTURBA_H
#define PERTURBA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define PERTURBA_OK 0

// Malformed input: JSON syntax, schema, or shape errors.
#define PERTURBA_ERR_SCHEMA 1

// Well-formed input that fails a mathematical requirement.
#define PERTURBA_ERR_MATH 2

// A required pointer argument was NULL.
#define PERTURBA_ERR_NULL 3

// A string argument was not valid UTF-8.
#define PERTURBA_ERR_UTF8 4

// An internal panic was caught at the boundary.
#define PERTURBA_ERR_PANIC 5

// Opaque handle to a verified-format homotopy equivalence bundle over
// exact rationals.
typedef struct PerturbaHe PerturbaHe;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse a homotopy-equivalence bundle (the CLI's `verify-he` input format)
// into an owned handle. Shapes are validated here; mathematical identities
// are checked by [`perturba_he_verify`].
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
int32_t perturba_he_parse(const char *json, struct PerturbaHe **out);

// Check the full homotopy-equivalence contract: both differentials square
// to zero, `i` and `p` are chain maps, `ip = 1 + dh + hd`, and `i`, `p`
// are quasi-isomorphisms.
//
// # Safety
// `he` must be a live handle from this library.
int32_t perturba_he_verify(const struct PerturbaHe *he, double tol);

// Transfer the bundle along a perturbation `delta` of `d_M` (a graded-map
// JSON object with the differential's shift). Verifies the input bundle,
// certifies smallness of `delta·h`, applies the perturbation lemma, and
// re-verifies the output before returning it.
//
// # Safety
// `he` must be a live handle; `delta_json` a valid NUL-terminated string;
// `out` a valid pointer.
int32_t perturba_he_perturb(const struct PerturbaHe *he,
                            const char *delta_json,
                            double tol,
                            struct PerturbaHe **out);

// Serialize a bundle back to its JSON format. The returned string is owned
// by the caller; release it with [`perturba_string_free`].
//
// # Safety
// `he` must be a live handle and `out` a valid pointer.
int32_t perturba_he_to_json(const struct PerturbaHe *he, char **out);

// Release a handle returned by [`perturba_he_parse`] or
// [`perturba_he_perturb`]. NULL is ignored.
//
// # Safety
// `he` must be NULL or a live handle; it must not be used afterwards.
void perturba_he_free(struct PerturbaHe *he);

// Release a string returned by [`perturba_he_to_json`]. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string returned by this library; it must not be
// used afterwards.
void perturba_string_free(char *s);

// Verify the contraction identity `b′h + hb′ = 1` on the normalized
// complex of a finite metric space (JSON `{"n": k, "rho": [[...]]}`), for
// every arity from 2 through `max_arity`. Residuals are exact zeros over
// the rationals; any violation returns `PERTURBA_ERR_MATH`.
//
// # Safety
// `json` must be a valid NUL-terminated string.
int32_t perturba_metric_verify(const char *json, size_t max_arity, double tol);

// Certify rigidity of a Lie algebra (JSON `{"dim": n, "c": [[[...]]]}`):
// checks `H²(g;g) = 0`, then integrates the scaling family `(1+t)·[·,·]`
// on `[0, t_max]` and requires every isomorphism defect on the grid to
// stay within the trivialization budget.
//
// # Safety
// `json` must be a valid NUL-terminated string.
int32_t perturba_lie_rigidity(const char *json, double t_max, size_t steps, double tol);

// Diagnostic for the most recent failure on this thread, as a NUL-terminated
// UTF-8 string. Never NULL; empty before the first failure. The pointer is
// invalidated by the next failing call on the same thread.
const char *perturba_last_error_message(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PERTURBA_H */
