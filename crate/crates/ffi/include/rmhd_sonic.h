#ifndef RMHD_SONIC_H
#define RMHD_SONIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RmhdStatus {
  RMHD_STATUS_OK = 0,
  RMHD_STATUS_NULL_POINTER = 1,
  RMHD_STATUS_INVALID_ARGUMENT = 2,
  RMHD_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * Configuration or boundary data rejected.
   */
  RMHD_STATUS_CONFIG = 4,
  /**
   * Quadrature, root finding or table range failure.
   */
  RMHD_STATUS_NUMERICAL = 5,
  /**
   * The hodograph iteration found no admissible step or did not converge.
   */
  RMHD_STATUS_SOLVER = 6,
  RMHD_STATUS_VERIFY = 7,
  RMHD_STATUS_IO = 8,
  RMHD_STATUS_PANIC = 9,
} RmhdStatus;

/**
 * Run configuration.
 */
typedef struct RmhdConfig RmhdConfig;

/**
 * Converged hodograph solution with its boundary data; the forward map used by
 * [`rmhd_solution_invert`] is built on first use.
 */
typedef struct RmhdSolution RmhdSolution;

/**
 * Thermodynamic table in the hodograph variable `t = cos(omega)`.
 */
typedef struct RmhdTable RmhdTable;

/**
 * Flow state at one value of `t`.
 */
typedef struct RmhdState {
  double t;
  double varpi;
  double rho;
  double p;
  double n;
  double w;
  double q;
  double mach;
  double f_cap;
} RmhdState;

/**
 * Summary of a solve.
 */
typedef struct RmhdSolveInfo {
  double delta;
  size_t n_v;
  size_t n_chi;
  size_t iterations;
  double ratio_fit;
  double m_hat;
  /**
   * `theta^` at the two ends of the sonic curve.
   */
  double r1;
  double r2;
  double t0;
} RmhdSolveInfo;

/**
 * Physical-plane fields at one point.
 */
typedef struct RmhdRecord {
  double x;
  double y;
  double theta;
  double t;
  double u;
  double v;
  double q;
  double mach;
} RmhdRecord;

/**
 * Graded acceptance criterion.
 */
typedef struct RmhdVerdict {
  uint8_t criterion;
  bool pass;
} RmhdVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmhd_version(void);

/**
 * Message of the last failed call on this thread, or null when there was none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rmhd_last_error(void);

/**
 * Forgets the last error of this thread.
 */
void rmhd_clear_error(void);

/**
 * The canonical configuration.
 *
 * # Safety
 * `out` must be valid for one pointer write. Release the handle with
 * [`rmhd_config_free`].
 */
enum RmhdStatus rmhd_config_canonical(struct RmhdConfig **out);

/**
 * Parses and checks a TOML configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` valid for one pointer write.
 */
enum RmhdStatus rmhd_config_from_toml(const char *toml, struct RmhdConfig **out);

/**
 * Overrides the solver grid.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum RmhdStatus rmhd_config_set_grid(struct RmhdConfig *cfg, size_t n_v, size_t n_chi);

/**
 * Overrides the field strength constant; zero is the unmagnetized gas.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum RmhdStatus rmhd_config_set_kappa0(struct RmhdConfig *cfg, double kappa0);

/**
 * # Safety
 * `cfg` must be null or a handle from this library not yet freed.
 */
void rmhd_config_free(struct RmhdConfig *cfg);

/**
 * Builds the thermodynamic table of a configuration.
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` valid for one pointer write.
 * Release the table with [`rmhd_table_free`].
 */
enum RmhdStatus rmhd_table_build(const struct RmhdConfig *cfg, struct RmhdTable **out);

/**
 * State at `t` in `[0, t_max]`.
 *
 * # Safety
 * `table` must be a live table handle and `out` valid for one write.
 */
enum RmhdStatus rmhd_table_state(const struct RmhdTable *table, double t, struct RmhdState *out);

/**
 * Sonic density and Bernoulli constant.
 *
 * # Safety
 * `table` must be a live table handle; `rho_star` and `bernoulli` valid for one write.
 */
enum RmhdStatus rmhd_table_sonic(const struct RmhdTable *table,
                                 double *rho_star,
                                 double *bernoulli);

/**
 * # Safety
 * `table` must be null or a handle from this library not yet freed.
 */
void rmhd_table_free(struct RmhdTable *table);

/**
 * Builds the boundary data and runs the hodograph solve, halving the strip width
 * when it is inadmissible.
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` valid for one pointer write.
 * Release the solution with [`rmhd_solution_free`].
 */
enum RmhdStatus rmhd_solve(const struct RmhdConfig *cfg, struct RmhdSolution **out);

/**
 * # Safety
 * `sol` must be a live solution handle and `out` valid for one write.
 */
enum RmhdStatus rmhd_solution_info(const struct RmhdSolution *sol, struct RmhdSolveInfo *out);

/**
 * Riemann-type invariants `(W, Z)` at `(t, r)` inside the solved region.
 *
 * # Safety
 * `sol` must be a live solution handle; `w` and `z` valid for one write each.
 */
enum RmhdStatus rmhd_solution_wz(const struct RmhdSolution *sol,
                                 double t,
                                 double r,
                                 double *w,
                                 double *z);

/**
 * Node values as rows `(t, r, W, Z)`, flattened: `rows` receives `4 * count` doubles
 * and `cap` and `*written` count rows.
 *
 * # Safety
 * `sol` must be a live solution handle, `rows` valid for `4 * cap` doubles (or null
 * with `cap = 0`) and `written` valid for one write.
 */
enum RmhdStatus rmhd_solution_field(const struct RmhdSolution *sol,
                                    double *rows,
                                    size_t cap,
                                    size_t *written);

/**
 * Hodograph coordinates `(t, r)` of the physical point `(x, y)`.
 *
 * # Safety
 * `sol` must be a live solution handle not used concurrently from another thread;
 * `t` and `r` valid for one write each.
 */
enum RmhdStatus rmhd_solution_invert(struct RmhdSolution *sol,
                                     double x,
                                     double y,
                                     double *t,
                                     double *r);

/**
 * Physical records on an `n_t` by `n_chi` lattice of the solved region.
 *
 * # Safety
 * `sol` must be a live solution handle, `out` valid for `cap` records (or null with
 * `cap = 0`) and `written` valid for one write.
 */
enum RmhdStatus rmhd_solution_recover(const struct RmhdSolution *sol,
                                      size_t n_t,
                                      size_t n_chi,
                                      struct RmhdRecord *out,
                                      size_t cap,
                                      size_t *written);

/**
 * Runs the verification suite of the solution's configuration and reports the
 * graded criteria 1 to 7.
 *
 * # Safety
 * `sol` must be a live solution handle, `out` valid for `cap` verdicts (or null with
 * `cap = 0`) and `written` valid for one write.
 */
enum RmhdStatus rmhd_solution_verify(const struct RmhdSolution *sol,
                                     struct RmhdVerdict *out,
                                     size_t cap,
                                     size_t *written);

/**
 * # Safety
 * `sol` must be null or a handle from this library not yet freed.
 */
void rmhd_solution_free(struct RmhdSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMHD_SONIC_H */
