#ifndef MONOPOLE_H
#define MONOPOLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MonopoleStatus {
  MONOPOLE_STATUS_OK = 0,
  MONOPOLE_STATUS_NULL_POINTER = 1,
  MONOPOLE_STATUS_INVALID_ARGUMENT = 2,
  MONOPOLE_STATUS_INADMISSIBLE = 3,
  /**
   * Interior theta zeros: the curve is not a monopole curve.
   */
  MONOPOLE_STATUS_VERDICT_NEGATIVE = 4,
  MONOPOLE_STATUS_NUMERICAL = 5,
  MONOPOLE_STATUS_PANIC = 6,
} MonopoleStatus;

/**
 * Solved winding data.
 */
typedef struct MonopoleEs MonopoleEs;

/**
 * Nahm triple sampled on a grid.
 */
typedef struct MonopoleNahm MonopoleNahm;

/**
 * Periods and period matrices of one curve.
 */
typedef struct MonopolePeriods MonopolePeriods;

typedef struct MonopoleComplex {
  double re;
  double im;
} MonopoleComplex;

/**
 * Plain copy of the solved winding data.
 */
typedef struct MonopoleEsSummary {
  int64_t n1;
  int64_t m1;
  double t;
  double b;
  double alpha;
  double chi;
  double chi_cuberoot;
  double xi;
  int64_t d;
  int64_t n[4];
  int64_t m[4];
} MonopoleEsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message into `buf` (NUL terminated, truncated to `len`).
 * Returns the full message length without the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
uintptr_t monopole_last_error(char *buf, uintptr_t len);

/**
 * Static NUL-terminated name of a status code.
 */
const char *monopole_status_name(enum MonopoleStatus status);

/**
 * Gauss hypergeometric function `2F1(a, b; c; z)`.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum MonopoleStatus monopole_hyp2f1(struct MonopoleComplex a,
                                    struct MonopoleComplex b,
                                    struct MonopoleComplex c,
                                    struct MonopoleComplex z,
                                    struct MonopoleComplex *result);

/**
 * Theta function with characteristic `[a/den, b/den]` for a genus-`g` period matrix
 * given row-major in `tau` (`g * g` entries).
 *
 * # Safety
 * `tau` must hold `g * g` values, `z`, `a`, `b` must hold `g` values (`a`, `b` may be null for zero), `result` valid.
 */
enum MonopoleStatus monopole_theta(uintptr_t g,
                                   const struct MonopoleComplex *tau,
                                   const struct MonopoleComplex *z,
                                   const int64_t *a,
                                   const int64_t *b,
                                   int64_t den,
                                   struct MonopoleComplex *result);

/**
 * Solve the Ercolani-Sinha constraints for `(n1, m1)`.
 *
 * # Safety
 * `handle` must be a valid pointer; on success it receives a handle to free with [`monopole_es_free`].
 */
enum MonopoleStatus monopole_es_new(int64_t n1,
                                    int64_t m1,
                                    struct MonopoleEs **handle);

/**
 * # Safety
 * `handle` must come from [`monopole_es_new`] (or be null) and not be used afterwards.
 */
void monopole_es_free(struct MonopoleEs *handle);

/**
 * # Safety
 * `handle` and `summary` must be valid pointers.
 */
enum MonopoleStatus monopole_es_summary(const struct MonopoleEs *handle,
                                        struct MonopoleEsSummary *summary);

/**
 * Periods of `w^3 = z^6 + b z^3 - 1`.
 *
 * # Safety
 * `handle` must be a valid pointer; free the result with [`monopole_periods_free`].
 */
enum MonopoleStatus monopole_periods_new(double b, struct MonopolePeriods **handle);

/**
 * # Safety
 * `handle` must come from [`monopole_periods_new`] (or be null) and not be used afterwards.
 */
void monopole_periods_free(struct MonopolePeriods *handle);

/**
 * Row-major 4x4 Riemann matrix `tau_b` into `tau` (16 entries).
 *
 * # Safety
 * `handle` valid, `tau` valid for 16 values.
 */
enum MonopoleStatus monopole_periods_tau(const struct MonopolePeriods *handle,
                                         struct MonopoleComplex *tau);

/**
 * Scalar `y . H x` of the period data.
 *
 * # Safety
 * `handle` and `result` must be valid pointers.
 */
enum MonopoleStatus monopole_periods_legendre(const struct MonopolePeriods *handle,
                                              struct MonopoleComplex *result);

/**
 * Theta zero scan on `nodes` points of `s in [0, 2]`. Writes whether the interior is pole free
 * and the number of interior zeros.
 *
 * # Safety
 * `es` valid; `pole_free` and `interior` valid pointers.
 */
enum MonopoleStatus monopole_zero_scan(const struct MonopoleEs *es,
                                       uintptr_t nodes,
                                       bool *pole_free,
                                       uintptr_t *interior);

/**
 * Charge-2 Nahm data for elliptic modulus `k` on a symmetric grid of `[-zmax, zmax]`.
 *
 * # Safety
 * `handle` must be a valid pointer; free the result with [`monopole_nahm_free`].
 */
enum MonopoleStatus monopole_nahm2_new(double k,
                                       double zmax,
                                       uintptr_t nodes,
                                       struct MonopoleNahm **handle);

/**
 * Charge-3 Nahm data for solved winding data. Returns `VerdictNegative` when `Q0` has interior poles.
 * `eps` holds the two gauge signs (null for `+1, +1`).
 *
 * # Safety
 * `es` valid, `eps` null or valid for 2 values, `handle` valid; free the result with [`monopole_nahm_free`].
 */
enum MonopoleStatus monopole_nahm3_new(const struct MonopoleEs *es,
                                       const int64_t *eps,
                                       double zmax,
                                       uintptr_t nodes,
                                       struct MonopoleNahm **handle);

/**
 * # Safety
 * `handle` must come from a `monopole_nahm*_new` call (or be null) and not be used afterwards.
 */
void monopole_nahm_free(struct MonopoleNahm *handle);

/**
 * Number of grid nodes and matrix size.
 *
 * # Safety
 * All pointers valid.
 */
enum MonopoleStatus monopole_nahm_shape(const struct MonopoleNahm *handle,
                                        uintptr_t *nodes,
                                        uintptr_t *size);

/**
 * Node `node` of the grid: `z`, the Nahm residual, and `T_which` (1, 2 or 3) row-major into `t` (`size * size` entries).
 *
 * # Safety
 * All pointers valid; `t` holds `size * size` values.
 */
enum MonopoleStatus monopole_nahm_node(const struct MonopoleNahm *handle,
                                       uintptr_t node,
                                       uint32_t which,
                                       double *z,
                                       double *residual,
                                       struct MonopoleComplex *t);

/**
 * Largest Nahm residual over the grid.
 *
 * # Safety
 * All pointers valid.
 */
enum MonopoleStatus monopole_nahm_max_residual(const struct MonopoleNahm *handle, double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOPOLE_H */
