#ifndef LOGDIFF_H
#define LOGDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LdBoundary {
  /**
   * `(2t + α) h`, α = parameter.
   */
  LD_BOUNDARY_HYPERBOLIC = 0,
  /**
   * `(2t + 1) h_a`, a = parameter.
   */
  LD_BOUNDARY_ANNULUS = 1,
  /**
   * Fixed value = parameter.
   */
  LD_BOUNDARY_CONSTANT = 2,
  /**
   * Trace of the scaled cigar, μ = parameter.
   */
  LD_BOUNDARY_CIGAR_EXACT = 3,
} LdBoundary;

typedef enum LdMetric {
  /**
   * `h`; the parameter is ignored.
   */
  LD_METRIC_FULL = 0,
  /**
   * `h_ρ` with `ρ` = parameter.
   */
  LD_METRIC_SUB_BALL = 1,
  /**
   * `h_a` with inner radius `a` = parameter.
   */
  LD_METRIC_ANNULUS = 2,
  /**
   * `h₀`; the parameter is ignored.
   */
  LD_METRIC_PUNCTURED = 3,
} LdMetric;

typedef enum LdStatus {
  LD_STATUS_OK = 0,
  LD_STATUS_NULL_POINTER = 1,
  LD_STATUS_INVALID_ARGUMENT = 2,
  LD_STATUS_DOMAIN = 3,
  LD_STATUS_SOLVER_FAILURE = 4,
  LD_STATUS_INTERPOLATION = 5,
  LD_STATUS_INTERNAL = 6,
} LdStatus;

/**
 * Opaque sampled conformal factor on a radial grid.
 */
typedef struct LdField LdField;

/**
 * Opaque sequence of recorded snapshots.
 */
typedef struct LdTrajectory LdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ld_last_error(void);

enum LdStatus ld_metric_eval(enum LdMetric kind, double param, double r, double *value);

/**
 * Applies `z ↦ e^{iθ}(z − a)/(1 − āz)` to `(x, y)` and reports `|φ′|²`.
 */
enum LdStatus ld_mobius_apply(double a_re,
                              double a_im,
                              double theta,
                              double x,
                              double y,
                              double *out_x,
                              double *out_y,
                              double *out_jacobian);

enum LdStatus ld_exact_cigar_scaled(double mu, double r, double t, double *value);

/**
 * Mass of the scaled cigar in `B_r` at time `t`.
 */
enum LdStatus ld_cigar_l1_mass(double mu, double t, double r, double *value);

/**
 * Wraps `len` samples (interior nodes then the boundary node) on the radial
 * grid with `n` cells and rim offset `eps`.
 */
enum LdStatus ld_field_radial_from_values(size_t n,
                                          double eps,
                                          const double *values,
                                          size_t len,
                                          double time,
                                          struct LdField **field);

/**
 * Samples `(2t + α) h` on a radial grid.
 */
enum LdStatus ld_field_hyperbolic(size_t n,
                                  double eps,
                                  double alpha,
                                  double t,
                                  struct LdField **field);

/**
 * Samples the scaled cigar on a radial grid.
 */
enum LdStatus ld_field_cigar(size_t n, double eps, double mu, double t, struct LdField **field);

enum LdStatus ld_field_len(const struct LdField *field, size_t *len);

/**
 * Copies the samples into `buf`, which must hold at least `ld_field_len`
 * values.
 */
enum LdStatus ld_field_copy_values(const struct LdField *field, double *buf, size_t cap);

/**
 * Radius of node `i`.
 */
enum LdStatus ld_field_node_radius(const struct LdField *field, size_t i, double *r);

/**
 * `L^p` norm over `B_ball`, or over the whole grid when `ball <= 0`.
 */
enum LdStatus ld_lp_norm(const struct LdField *field, double p, double ball, double *value);

/**
 * Largest sample in `B_ball`, or over the whole grid when `ball <= 0`.
 */
enum LdStatus ld_sup_region(const struct LdField *field, double ball, double *value);

void ld_field_free(struct LdField *field);

/**
 * Runs the flow from `initial` to `t_end`. A run that stops early still
 * yields a trajectory; check it with [`ld_trajectory_aborted`].
 */
enum LdStatus ld_solve_radial(const struct LdField *initial,
                              enum LdBoundary boundary,
                              double param,
                              double t_end,
                              double dt,
                              size_t record_every,
                              struct LdTrajectory **trajectory);

enum LdStatus ld_trajectory_len(const struct LdTrajectory *traj, size_t *len);

/**
 * 1 if the run stopped before `t_end`, else 0.
 */
enum LdStatus ld_trajectory_aborted(const struct LdTrajectory *traj, int32_t *aborted);

enum LdStatus ld_trajectory_time(const struct LdTrajectory *traj, size_t i, double *t);

/**
 * Copies snapshot `i` into `buf` (at least as many values as the initial
 * field).
 */
enum LdStatus ld_trajectory_copy_snapshot(const struct LdTrajectory *traj,
                                          size_t i,
                                          double *buf,
                                          size_t cap);

void ld_trajectory_free(struct LdTrajectory *traj);

/**
 * Runs the named check with an optional JSON config (null for defaults)
 * and returns the JSON report array in `*json`, to be released with
 * [`ld_string_free`]. `*all_pass` is 1 when every report passed.
 */
enum LdStatus ld_verify_json(const char *check,
                             const char *config_json,
                             char **json,
                             int32_t *all_pass);

void ld_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LOGDIFF_H */
