/* C ABI for the hyperspherical ladder bound-state solver. */

#ifndef HYPERLADDER_H
#define HYPERLADDER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 *
 * Values 0–4 equal the CLI exit codes for the same conditions; 5–7 are
 * boundary conditions that can only arise at the ABI (bad pointers, calls
 * out of order, bad indices).
 */
typedef enum HlStatus {
  /**
   * Success.
   */
  HL_STATUS_OK = 0,
  /**
   * Unexpected internal failure (eigensolver, quadrature, I/O).
   */
  HL_STATUS_INTERNAL = 1,
  /**
   * Invalid physical or basis parameters.
   */
  HL_STATUS_CONFIG = 2,
  /**
   * Some rung had no bound state; rungs below it remain readable.
   */
  HL_STATUS_NO_BOUND_STATE = 3,
  /**
   * Kept for code parity with the CLI; the C ABI never touches the
   * on-disk cache, so this value is never returned here.
   */
  HL_STATUS_CACHE_CORRUPT = 4,
  /**
   * A required pointer argument was null.
   */
  HL_STATUS_NULL_ARGUMENT = 5,
  /**
   * Accessor called before a successful [`hl_solver_run`].
   */
  HL_STATUS_NOT_SOLVED = 6,
  /**
   * State or channel index past the computed range, or an output
   * buffer smaller than the basis.
   */
  HL_STATUS_OUT_OF_RANGE = 7,
} HlStatus;

/**
 * Opaque solver handle. Create with [`hl_solver_new`], destroy with
 * [`hl_solver_free`]; C code must treat the layout as unknown.
 */
typedef struct HlSolver HlSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a solver for one symmetry term.
 *
 * Arguments:
 * - `ne`: number of electrons, 1 or 2.
 * - `z`: nuclear charge in atomic units; finite and >= 0.
 * - `ell`: orbital angular momentum. Must be 0 when `ne == 2` (the
 *   two-electron solver covers the ¹S sector only).
 * - `kmax`: hyperangular cutoff, keeping every allowed channel with
 *   K <= Kmax. Must be even when `ne == 2`; ignored when `ne == 1`,
 *   whose basis is the single channel (ell, ell).
 * - `n_max`: highest rung walked by [`hl_solver_run`]; rungs are
 *   n = 0..=n_max, so at most `n_max + 1` states. Capped at 64.
 * - `status`: optional out-parameter for the failure reason; may be null.
 *
 * Returns a fresh handle, or null if the parameters are rejected
 * (`status` then holds [`HlStatus::Config`]). Free with
 * [`hl_solver_free`].
 *
 * # Safety
 *
 * `status` must be null or point to writable memory for one `HlStatus`.
 */
struct HlSolver *hl_solver_new(uint32_t ne,
                               double z,
                               uint32_t ell,
                               uint32_t kmax,
                               uint32_t n_max,
                               enum HlStatus *status);

/**
 * Destroy a handle from [`hl_solver_new`]. Null is a no-op.
 *
 * # Safety
 *
 * `solver` must be null or a handle from [`hl_solver_new`] that has not
 * already been freed; no other `hl_solver_*` call may use it afterwards.
 */
void hl_solver_free(struct HlSolver *solver);

/**
 * Assemble the potential matrix and walk the rung ladder n = 0..=n_max.
 *
 * Returns [`HlStatus::Ok`] when every rung bound. Returns
 * [`HlStatus::NoBoundState`] when some rung failed to bind: states below
 * the failed rung were computed and stay readable, so a partial table is
 * still available (the failed rung index equals
 * [`hl_solver_state_count`]). Any other status leaves no readable states.
 *
 * Running again recomputes from scratch; results are deterministic.
 *
 * # Safety
 *
 * `solver` must be a live handle from [`hl_solver_new`].
 */
enum HlStatus hl_solver_run(struct HlSolver *solver);

/**
 * Number of channels (K, ℓ) in the basis; fixed at construction.
 * Returns 0 for a null handle.
 *
 * # Safety
 *
 * `solver` must be null or a live handle from [`hl_solver_new`].
 */
uintptr_t hl_solver_basis_size(const struct HlSolver *solver);

/**
 * Quantum numbers (K, ℓ) of basis channel `i`, in the enumeration order
 * used by [`hl_solver_coefficients`]. Valid before [`hl_solver_run`].
 *
 * # Safety
 *
 * `solver` must be a live handle; `k_out` and `ell_out` must each point
 * to writable memory for one `u32`.
 */
enum HlStatus hl_solver_channel(const struct HlSolver *solver,
                                uintptr_t i,
                                uint32_t *k_out,
                                uint32_t *ell_out);

/**
 * Number of bound states held by the handle: 0 before the first
 * successful run or for a null handle, otherwise the rungs that bound
 * (n = 0 is the lowest).
 *
 * # Safety
 *
 * `solver` must be null or a live handle from [`hl_solver_new`].
 */
uintptr_t hl_solver_state_count(const struct HlSolver *solver);

/**
 * Exponential slope λₙ < 0 of bound state `n`; written to `*out`.
 *
 * # Safety
 *
 * `solver` must be a live handle; `out` must point to writable memory
 * for one `f64`.
 */
enum HlStatus hl_solver_lambda(const struct HlSolver *solver, uintptr_t n, double *out);

/**
 * Energy Eₙ = −½λₙ² of bound state `n` in Hartree; written to `*out`.
 *
 * # Safety
 *
 * `solver` must be a live handle; `out` must point to writable memory
 * for one `f64`.
 */
enum HlStatus hl_solver_energy(const struct HlSolver *solver, uintptr_t n, double *out);

/**
 * Channel coefficients of bound state `n`: unit 2-norm, sign-fixed, one
 * per basis channel in enumeration order (label channels with
 * [`hl_solver_channel`]). Copies [`hl_solver_basis_size`] values into
 * `out`; `len` is the capacity of `out` and must be at least that size.
 *
 * # Safety
 *
 * `solver` must be a live handle; `out` must point to writable memory
 * for at least `len` `f64` values.
 */
enum HlStatus hl_solver_coefficients(const struct HlSolver *solver,
                                     uintptr_t n,
                                     double *out,
                                     uintptr_t len);

/**
 * Static, NUL-terminated name for a status code (the integer value of an
 * [`HlStatus`]); unknown values map to `"unknown status"`. Never free
 * the returned pointer.
 */
const char *hl_status_name(int32_t status);

/**
 * Library version as a static, NUL-terminated string. Never free the
 * returned pointer.
 */
const char *hl_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HYPERLADDER_H */
