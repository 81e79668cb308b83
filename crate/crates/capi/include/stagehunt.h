/*
 * C ABI for the stagehunt predator-prey bifurcation toolkit.
 *
 * Every function returns an ShStatus; outputs are written through
 * pointers only on SH_STATUS_OK.  Handles (ShParams, ShTrajectory,
 * ShBranch) are opaque and must be released with their sh_*_free
 * function.  All handles are single-threaded; the last error message is
 * thread-local and read with sh_last_error.
 */

#ifndef STAGEHUNT_H
#define STAGEHUNT_H

/* Generated by cbindgen from stagehunt-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of every API call.
typedef enum ShStatus {
  // Success; any promised outputs were written.
  SH_STATUS_OK = 0,
  // A required pointer argument was null.
  SH_STATUS_NULL_POINTER = 1,
  // An argument was malformed (unknown name, bad range, bad value).
  SH_STATUS_INVALID_ARGUMENT = 2,
  // The computation itself failed; see `sh_last_error`.
  SH_STATUS_NUMERICAL_FAILURE = 3,
  // The requested object does not exist at these parameters.
  SH_STATUS_NOT_FOUND = 4,
  // The caller-provided buffer cannot hold the full result.
  SH_STATUS_BUFFER_TOO_SMALL = 5,
} ShStatus;

// Equilibrium branch handle from a continuation run.
typedef struct ShBranch ShBranch;

// Parameter set handle (nine positive rates).
typedef struct ShParams ShParams;

// Integrated trajectory handle: sample times and states.
typedef struct ShTrajectory ShTrajectory;

// One equilibrium: its kind code and coordinates.
//
// Kinds: 0 extinction, 1 prey-only, 2 high-prey interior, 3 low-prey
// interior.
typedef struct ShEquilibrium {
  int32_t kind;
  double state[4];
} ShEquilibrium;

// Hopf normal-form summary at an expansion point.
//
// `l1` is the first Lyapunov quantity: negative means the emerging
// cycle is stable (supercritical bifurcation).  `block_error` is the
// residual of the block-diagonalization identity and should be tiny;
// treat results with `block_error > 1e-6` as unreliable.
typedef struct ShHopfData {
  double alpha;
  double g20_re;
  double g20_im;
  double g11_re;
  double g11_im;
  double g02_re;
  double g02_im;
  double g21_re;
  double g21_im;
  double c1_re;
  double c1_im;
  double beta2;
  double l1;
  double block_error;
} ShHopfData;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the library, as a static NUL-terminated C string.
const char *sh_version(void);

// Copies the thread-local message of the most recent failure into
// `buffer` (NUL-terminated, truncated to `capacity` bytes) and returns
// the full message length in bytes, excluding the NUL.  Call with a
// null `buffer` or zero `capacity` to query the required length.  The
// message is empty after any successful call.
size_t sh_last_error(char *buffer, size_t capacity);

// First benchmark parameter set.  Free with `sh_params_free`.
struct ShParams *sh_params_table1(void);

// Second benchmark parameter set.  Free with `sh_params_free`.
struct ShParams *sh_params_table2(void);

// Releases a parameter handle.  Null is a no-op.
void sh_params_free(struct ShParams *params);

// Sets one parameter by name (`a1`, `a2`, `a3`, `b`, `c`, `d1`, `d2`,
// `d3`, `u`).  Values must be positive and finite.
enum ShStatus sh_params_set(struct ShParams *params, const char *name, double value);

// Reads one parameter by name into `value`.
enum ShStatus sh_params_get(const struct ShParams *params, const char *name, double *value);

// Evaluates the vector field at `state[4]` into `out[4]`.
enum ShStatus sh_rhs(const struct ShParams *params, const double *state, double *out);

// Writes the analytic Jacobian at `state[4]` into `out[16]`, row-major.
enum ShStatus sh_jacobian(const struct ShParams *params, const double *state, double *out);

// Writes every feasible equilibrium into `out[capacity]` and the total
// count into `count`.  There are at most four.  When `capacity` is too
// small the first `capacity` entries are written, `count` still
// receives the total, and the call returns
// `SH_STATUS_BUFFER_TOO_SMALL`.
enum ShStatus sh_equilibria(const struct ShParams *params,
                            struct ShEquilibrium *out,
                            size_t capacity,
                            size_t *count);

// Eigenvalues of the Jacobian at `state[4]`, written as four
// real/imaginary pairs sorted by descending real part.
enum ShStatus sh_eigenvalues(const struct ShParams *params,
                             const double *state,
                             double *out_re,
                             double *out_im);

// Routh–Hurwitz test values `[eps1, eps4, eps1*eps2 - eps3, Delta]` of
// the Jacobian at `state[4]`; `stable` receives 1 when all four are
// positive (asymptotic stability), else 0.
enum ShStatus sh_routh_hurwitz(const struct ShParams *params,
                               const double *state,
                               double *out_tests,
                               int32_t *stable);

// Integrates from `init[4]` for `tmax` time units and returns a
// trajectory handle through `out`.  A positive `stride` records samples
// on that uniform grid; `stride <= 0` records every accepted step.
// Free the handle with `sh_trajectory_free`.
enum ShStatus sh_simulate(const struct ShParams *params,
                          const double *init,
                          double tmax,
                          double stride,
                          struct ShTrajectory **out);

// Number of recorded samples.  Null yields 0.
size_t sh_trajectory_len(const struct ShTrajectory *trajectory);

// Reads sample `index` into `time` and `state[4]`.
enum ShStatus sh_trajectory_sample(const struct ShTrajectory *trajectory,
                                   size_t index,
                                   double *time,
                                   double *state);

// Classifies where the trajectory settled.  `kind` receives -1 when
// undecided, 0..3 for an equilibrium (see `ShEquilibrium` kinds), or 4
// for a limit cycle; `measure` receives the sup-distance to the
// equilibrium or the prey amplitude of the cycle (0 when undecided).
enum ShStatus sh_attractor(const struct ShTrajectory *trajectory, int32_t *kind, double *measure);

// Releases a trajectory handle.  Null is a no-op.
void sh_trajectory_free(struct ShTrajectory *trajectory);

// Traces the equilibrium branch through the low-prey interior state in
// the named parameter across `[lo, hi]` (both senses from the current
// value, which must lie inside) and returns a branch handle through
// `out`.  Fold, Hopf, and branch points are localized along the way.
// Fails with `SH_STATUS_NOT_FOUND` when no feasible low interior
// equilibrium exists at the current parameters.  Free the handle with
// `sh_branch_free`.
enum ShStatus sh_continue(const struct ShParams *params,
                          const char *name,
                          double lo,
                          double hi,
                          struct ShBranch **out);

// Number of points on the branch.  Null yields 0.
size_t sh_branch_len(const struct ShBranch *branch);

// Reads branch point `index`: parameter value, equilibrium `state[4]`,
// and whether the equilibrium is stable there (1/0).
enum ShStatus sh_branch_point(const struct ShBranch *branch,
                              size_t index,
                              double *param,
                              double *state,
                              int32_t *stable);

// Number of special points (folds, Hopf points, branch points) found.
size_t sh_branch_special_count(const struct ShBranch *branch);

// Reads special point `index`.  `kind` receives 0 for a fold, 1 for a
// Hopf point, 2 for a branch (transcritical) point; `l1` receives the
// first Lyapunov quantity at a Hopf point and NaN otherwise.
enum ShStatus sh_branch_special(const struct ShBranch *branch,
                                size_t index,
                                int32_t *kind,
                                double *param,
                                double *state,
                                double *l1);

// Releases a branch handle.  Null is a no-op.
void sh_branch_free(struct ShBranch *branch);

// Hopf normal-form coefficients at `state[4]`, which must be an
// equilibrium carrying a (near-)critical complex pair — e.g. a Hopf
// special point from `sh_branch_special`.
enum ShStatus sh_hopf_normal_form(const struct ShParams *params,
                                  const double *state,
                                  struct ShHopfData *out);

// Closed-form transcritical threshold for the adult predation rate at
// the prey-only state; fails when the geometry degenerates (equal
// effective rates) or the threshold is nonpositive.
enum ShStatus sh_transcritical_threshold(const struct ShParams *params, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STAGEHUNT_H */
