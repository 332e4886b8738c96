#ifndef RMG_H
#define RMG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmgStatus {
  RMG_STATUS_OK = 0,
  RMG_STATUS_NULL_POINTER = 1,
  RMG_STATUS_INVALID_ARGUMENT = 2,
  RMG_STATUS_NUMERICAL_FAILURE = 3,
  RMG_STATUS_INDEX_OUT_OF_RANGE = 4,
  RMG_STATUS_PANIC = 5,
} RmgStatus;

typedef enum RmgFlow {
  RMG_FLOW_EXTRINSIC = 0,
  RMG_FLOW_INTRINSIC = 1,
  RMG_FLOW_GEODESIC = 2,
} RmgFlow;

typedef enum RmgTermination {
  RMG_TERMINATION_COMPLETED = 0,
  RMG_TERMINATION_STEP_SIZE_COLLAPSE = 1,
  RMG_TERMINATION_DOMAIN_EXIT = 2,
  RMG_TERMINATION_BUDGET_EXCEEDED = 3,
} RmgTermination;

typedef enum RmgPotentialMode {
  RMG_POTENTIAL_MODE_EXTRINSIC = 0,
  RMG_POTENTIAL_MODE_INTRINSIC = 1,
} RmgPotentialMode;

// Lump trajectory.
typedef struct RmgLumpTrajectory RmgLumpTrajectory;

// Equivariant n-lump geometry.
typedef struct RmgRatnGeometry RmgRatnGeometry;

// Reduced (s, ψ) trajectory.
typedef struct RmgReducedTrajectory RmgReducedTrajectory;

typedef struct RmgReducedSample {
  double t;
  double s;
  double psi;
  double s_dot;
  double psi_dot;
  double speed;
} RmgReducedSample;

// Integrator settings; zero fields take the library defaults.
typedef struct RmgOdeOptions {
  double abs_tol;
  double rel_tol;
  double max_step;
  size_t max_steps;
} RmgOdeOptions;

// Lump state; `o` is row-major.
typedef struct RmgLumpState {
  double o[9];
  double omega[3];
  double lambda[3];
  double lambda_dot[3];
} RmgLumpState;

typedef struct RmgCharges {
  double e;
  double p[3];
  double q[3];
} RmgCharges;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rmg_version(void);

// Copies the calling thread's last error message into `buf` (truncated and
// NUL-terminated) and returns the full message length in bytes.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t rmg_last_error(char *buf, size_t len);

// Profile of the hyperbolic two-vortex metric at separation s > 0:
// `out[9]` = (s, A, A₁, A₂, A₃, A₄, C, F restricted, F intrinsic).
//
// # Safety
// `out` must be valid for 9 doubles.
enum RmgStatus rmg_hyp2_profile(double s, double *out);

// Integrates the reduced vortex-pair flow. An early stop still yields a
// trajectory; query it with [`rmg_reduced_trajectory_termination`].
//
// # Safety
// `out` must be valid for writing; `opts` may be null.
enum RmgStatus rmg_hyp2_evolve(enum RmgFlow flow,
                               double charge,
                               struct RmgReducedSample initial,
                               double t_max,
                               size_t samples,
                               const struct RmgOdeOptions *opts,
                               struct RmgReducedTrajectory **out);

// # Safety
// `traj` must be null or a live handle.
size_t rmg_reduced_trajectory_len(const struct RmgReducedTrajectory *traj);

// # Safety
// `traj` must be a live handle and `out` valid for writing.
enum RmgStatus rmg_reduced_trajectory_sample(const struct RmgReducedTrajectory *traj,
                                             size_t index,
                                             struct RmgReducedSample *out);

// # Safety
// `traj` must be a live handle.
enum RmgTermination rmg_reduced_trajectory_termination(const struct RmgReducedTrajectory *traj);

// # Safety
// `traj` must be null or a handle not yet freed.
void rmg_reduced_trajectory_free(struct RmgReducedTrajectory *traj);

// Energy and the two conserved momenta of a lump state.
//
// # Safety
// Both pointers must be valid.
enum RmgStatus rmg_lump_charges(const struct RmgLumpState *state, struct RmgCharges *out);

// Integrates the lump flow over [0, t_max].
//
// # Safety
// `state` and `out` must be valid; `opts` may be null.
enum RmgStatus rmg_lump_evolve(const struct RmgLumpState *state,
                               double t_max,
                               size_t samples,
                               const struct RmgOdeOptions *opts,
                               struct RmgLumpTrajectory **out);

// # Safety
// `traj` must be null or a live handle.
size_t rmg_lump_trajectory_len(const struct RmgLumpTrajectory *traj);

// Sample `index`; any of `t`, `state`, `charges` may be null.
//
// # Safety
// `traj` must be a live handle; non-null outputs must be valid.
enum RmgStatus rmg_lump_trajectory_sample(const struct RmgLumpTrajectory *traj,
                                          size_t index,
                                          double *t,
                                          struct RmgLumpState *state,
                                          struct RmgCharges *charges_out);

// # Safety
// `traj` must be a live handle.
enum RmgTermination rmg_lump_trajectory_termination(const struct RmgLumpTrajectory *traj);

// # Safety
// `traj` must be null or a handle not yet freed.
void rmg_lump_trajectory_free(struct RmgLumpTrajectory *traj);

// # Safety
// `out` must be valid for writing.
enum RmgStatus rmg_ratn_geometry_new(uint32_t n, struct RmgRatnGeometry **out);

// # Safety
// `geom` must be null or a handle not yet freed.
void rmg_ratn_geometry_free(struct RmgRatnGeometry *geom);

// Metric function F_n(ρ).
//
// # Safety
// `geom` must be a live handle and `out` valid.
enum RmgStatus rmg_ratn_f_metric(const struct RmgRatnGeometry *geom, double rho, double *out);

// Effective potential V_P(χ).
//
// # Safety
// `geom` must be a live handle and `out` valid.
enum RmgStatus rmg_ratn_effective_potential(const struct RmgRatnGeometry *geom,
                                            double momentum,
                                            double chi,
                                            enum RmgPotentialMode mode,
                                            double *out);

// Profile row `out[6]` = (χ, F_n, a restricted, a intrinsic, V ext, V int).
//
// # Safety
// `geom` must be a live handle and `out` valid for 6 doubles.
enum RmgStatus rmg_ratn_profile_row(const struct RmgRatnGeometry *geom,
                                    double chi,
                                    double momentum,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMG_H */
