#ifndef PAIRDECAY_H
#define PAIRDECAY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_DOMAIN = 1,
  PD_STATUS_NODE = 2,
  PD_STATUS_UNSUPPORTED_VARIANT = 3,
  PD_STATUS_RESOURCE = 4,
  PD_STATUS_EMPTY_IMAGE = 5,
  PD_STATUS_RESOLUTION = 6,
  PD_STATUS_NUMERIC = 7,
  PD_STATUS_CONFIG = 8,
  PD_STATUS_IO = 9,
  PD_STATUS_NULL_POINTER = 10,
  PD_STATUS_OUT_OF_RANGE = 11,
  PD_STATUS_PANIC = 12,
} PdStatus;

// Pair wavefunction; `sigma = 0` selects the limit form.
typedef struct PdPairWave PdPairWave;

// Integrated pair trajectory.
typedef struct PdTrajectory PdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or an empty string.
// The pointer stays valid until the next call into the library from the
// same thread.
const char *pd_last_error(void);

// # Safety
// `out_mu` must be valid for writes.
enum PdStatus pd_reduced_mass(double m1, double m2, double *out_mu);

// Alignment range `R` in meters and time `T` in seconds for a source of
// width `l0` meters and wavelength `wavelength` meters.
//
// # Safety
// Both out-pointers must be valid for writes.
enum PdStatus pd_alignment_transition(double l0,
                                      double wavelength,
                                      double *out_t_seconds,
                                      double *out_r_meters);

double pd_bessel_j1(double x);

// # Safety
// Both out-pointers must be valid for writes.
enum PdStatus pd_band_edges(double e_plus,
                            double e_minus,
                            double mu,
                            double *out_a_plus,
                            double *out_a_minus);

// Evaluates the band profile `g` at `n` radii.
//
// # Safety
// `xs` must point to `n` readable values and `out` to `n` writable ones.
enum PdStatus pd_g_profile(double e_plus,
                           double e_minus,
                           double mu,
                           const double *xs,
                           size_t n,
                           double *out_values);

// # Safety
// Both out-pointers must be valid for writes.
enum PdStatus pd_thin_lens_conjugate(double s, double f, double *out_s_prime, bool *out_virtual);

// # Safety
// `out_wave` must be valid for writes. The handle must be released with
// [`pd_pair_wave_free`].
enum PdStatus pd_pair_wave_new(double m1,
                               double m2,
                               double alpha,
                               double sigma,
                               struct PdPairWave **out_wave);

// # Safety
// `wave` must come from [`pd_pair_wave_new`] and not be used afterwards.
void pd_pair_wave_free(struct PdPairWave *wave);

// # Safety
// `r1`, `r2` point to 3 values each; out-pointers must be writable.
enum PdStatus pd_pair_wave_eval(const struct PdPairWave *wave,
                                const double *r1,
                                const double *r2,
                                double t,
                                double *out_re,
                                double *out_im);

// Guidance velocities of both particles.
//
// # Safety
// `r1`, `r2`, `out_v1`, `out_v2` point to 3 values each.
enum PdStatus pd_pair_wave_velocity(const struct PdPairWave *wave,
                                    const double *r1,
                                    const double *r2,
                                    double t,
                                    double *out_v1,
                                    double *out_v2);

// RK4 trajectory from `(r1, r2)` at `t = 0` to `t_end`, keeping every
// `stride`-th step.
//
// # Safety
// `r1`, `r2` point to 3 values each; `out_traj` must be writable. The
// handle must be released with [`pd_trajectory_free`].
enum PdStatus pd_trajectory_integrate(const struct PdPairWave *wave,
                                      const double *r1,
                                      const double *r2,
                                      double t_end,
                                      double dt,
                                      size_t stride,
                                      struct PdTrajectory **out_traj);

// Number of stored samples, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t pd_trajectory_len(const struct PdTrajectory *traj);

// # Safety
// `traj` must be a live handle; `out_r1`, `out_r2` point to 3 writable
// values each.
enum PdStatus pd_trajectory_sample(const struct PdTrajectory *traj,
                                   size_t index,
                                   double *out_t,
                                   double *out_r1,
                                   double *out_r2);

// # Safety
// `traj` must come from [`pd_trajectory_integrate`] and not be used
// afterwards.
void pd_trajectory_free(struct PdTrajectory *traj);

// Runs a scenario given as TOML text. `out_dir` may be null to use the
// directory named in the text. On success `*out_files` (if not null)
// receives the number of files written.
//
// # Safety
// `config_toml` must be a NUL-terminated string; `out_dir` null or one.
enum PdStatus pd_run_scenario(const char *config_toml, const char *out_dir, size_t *out_files);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAIRDECAY_H */
