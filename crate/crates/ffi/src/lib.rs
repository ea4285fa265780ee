//! C ABI for the hyperspherical ladder solver.
//!
//! The surface is one opaque handle: [`hl_solver_new`] fixes the term and
//! basis, [`hl_solver_run`] walks the rung ladder, scalar accessors read the
//! results back, [`hl_solver_free`] releases the handle. Status codes mirror
//! the CLI exit-code contract so bindings can share one error table.
//!
//! The build script generates the matching C header at
//! `include/hyperladder.h` (see `cbindgen.toml`).
//!
//! No call panics across the boundary on inputs that satisfy the documented
//! contracts: every fallible path inside the library returns a status.

use std::os::raw::c_char;
use std::ptr;

use hyperladder::hyperbasis::{enumerate_basis, BasisPolicy, BasisSet, TermLabel};
use hyperladder::potential::{assemble_w, QuadratureSpec};
use hyperladder::spectral::{energy_ladder_from_w, SpectrumResult};
use hyperladder::Error;

/// Status code returned by every fallible call.
///
/// Values 0–4 equal the CLI exit codes for the same conditions; 5–7 are
/// boundary conditions that can only arise at the ABI (bad pointers, calls
/// out of order, bad indices).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    /// Success.
    Ok = 0,
    /// Unexpected internal failure (eigensolver, quadrature, I/O).
    Internal = 1,
    /// Invalid physical or basis parameters.
    Config = 2,
    /// Some rung had no bound state; rungs below it remain readable.
    NoBoundState = 3,
    /// Kept for code parity with the CLI; the C ABI never touches the
    /// on-disk cache, so this value is never returned here.
    CacheCorrupt = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
    /// Accessor called before a successful [`hl_solver_run`].
    NotSolved = 6,
    /// State or channel index past the computed range, or an output
    /// buffer smaller than the basis.
    OutOfRange = 7,
}

fn status_of(e: &Error) -> HlStatus {
    match e.exit_code() {
        2 => HlStatus::Config,
        3 => HlStatus::NoBoundState,
        4 => HlStatus::CacheCorrupt,
        _ => HlStatus::Internal,
    }
}

unsafe fn put_status(out: *mut HlStatus, value: HlStatus) {
    if !out.is_null() {
        *out = value;
    }
}

/// Opaque solver handle. Create with [`hl_solver_new`], destroy with
/// [`hl_solver_free`]; C code must treat the layout as unknown.
pub struct HlSolver {
    basis: BasisSet,
    n_max: usize,
    quad: QuadratureSpec,
    solved: Option<SpectrumResult>,
}

fn build_solver(ne: u32, z: f64, ell: u32, kmax: u32, n_max: u32) -> hyperladder::Result<HlSolver> {
    let term = match ne {
        1 => TermLabel::hydrogenic(z, ell)?,
        2 => {
            if ell != 0 {
                return Err(Error::Config(format!(
                    "two-electron runs are singlet S only; ell must be 0, got {ell}"
                )));
            }
            TermLabel::singlet_s(z)?
        }
        _ => return Err(Error::Config(format!("ne must be 1 or 2, got {ne}"))),
    };
    if n_max > 64 {
        // Same rung cap as the run pipeline; keeps one contract everywhere.
        return Err(Error::Config(format!("n_max must be <= 64, got {n_max}")));
    }
    let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(kmax))?;
    Ok(HlSolver {
        basis,
        n_max: n_max as usize,
        quad: QuadratureSpec::default(),
        solved: None,
    })
}

/// Create a solver for one symmetry term.
///
/// Arguments:
/// - `ne`: number of electrons, 1 or 2.
/// - `z`: nuclear charge in atomic units; finite and >= 0.
/// - `ell`: orbital angular momentum. Must be 0 when `ne == 2` (the
///   two-electron solver covers the ¹S sector only).
/// - `kmax`: hyperangular cutoff, keeping every allowed channel with
///   K <= Kmax. Must be even when `ne == 2`; ignored when `ne == 1`,
///   whose basis is the single channel (ell, ell).
/// - `n_max`: highest rung walked by [`hl_solver_run`]; rungs are
///   n = 0..=n_max, so at most `n_max + 1` states. Capped at 64.
/// - `status`: optional out-parameter for the failure reason; may be null.
///
/// Returns a fresh handle, or null if the parameters are rejected
/// (`status` then holds [`HlStatus::Config`]). Free with
/// [`hl_solver_free`].
///
/// # Safety
///
/// `status` must be null or point to writable memory for one `HlStatus`.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_new(
    ne: u32,
    z: f64,
    ell: u32,
    kmax: u32,
    n_max: u32,
    status: *mut HlStatus,
) -> *mut HlSolver {
    match build_solver(ne, z, ell, kmax, n_max) {
        Ok(solver) => {
            put_status(status, HlStatus::Ok);
            Box::into_raw(Box::new(solver))
        }
        Err(e) => {
            put_status(status, status_of(&e));
            ptr::null_mut()
        }
    }
}

/// Destroy a handle from [`hl_solver_new`]. Null is a no-op.
///
/// # Safety
///
/// `solver` must be null or a handle from [`hl_solver_new`] that has not
/// already been freed; no other `hl_solver_*` call may use it afterwards.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_free(solver: *mut HlSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Assemble the potential matrix and walk the rung ladder n = 0..=n_max.
///
/// Returns [`HlStatus::Ok`] when every rung bound. Returns
/// [`HlStatus::NoBoundState`] when some rung failed to bind: states below
/// the failed rung were computed and stay readable, so a partial table is
/// still available (the failed rung index equals
/// [`hl_solver_state_count`]). Any other status leaves no readable states.
///
/// Running again recomputes from scratch; results are deterministic.
///
/// # Safety
///
/// `solver` must be a live handle from [`hl_solver_new`].
#[no_mangle]
pub unsafe extern "C" fn hl_solver_run(solver: *mut HlSolver) -> HlStatus {
    let Some(solver) = solver.as_mut() else {
        return HlStatus::NullArgument;
    };
    solver.solved = None;
    let result = assemble_w(&solver.basis, &solver.quad)
        .and_then(|w| energy_ladder_from_w(&w, solver.n_max));
    match result {
        Ok(spectrum) => {
            let truncated = spectrum.truncated.is_some();
            solver.solved = Some(spectrum);
            if truncated {
                HlStatus::NoBoundState
            } else {
                HlStatus::Ok
            }
        }
        Err(e) => status_of(&e),
    }
}

/// Number of channels (K, ℓ) in the basis; fixed at construction.
/// Returns 0 for a null handle.
///
/// # Safety
///
/// `solver` must be null or a live handle from [`hl_solver_new`].
#[no_mangle]
pub unsafe extern "C" fn hl_solver_basis_size(solver: *const HlSolver) -> usize {
    solver.as_ref().map_or(0, |s| s.basis.len())
}

/// Quantum numbers (K, ℓ) of basis channel `i`, in the enumeration order
/// used by [`hl_solver_coefficients`]. Valid before [`hl_solver_run`].
///
/// # Safety
///
/// `solver` must be a live handle; `k_out` and `ell_out` must each point
/// to writable memory for one `u32`.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_channel(
    solver: *const HlSolver,
    i: usize,
    k_out: *mut u32,
    ell_out: *mut u32,
) -> HlStatus {
    let Some(solver) = solver.as_ref() else {
        return HlStatus::NullArgument;
    };
    if k_out.is_null() || ell_out.is_null() {
        return HlStatus::NullArgument;
    }
    let Some(idx) = solver.basis.indices.get(i) else {
        return HlStatus::OutOfRange;
    };
    *k_out = idx.k;
    *ell_out = idx.ell;
    HlStatus::Ok
}

/// Number of bound states held by the handle: 0 before the first
/// successful run or for a null handle, otherwise the rungs that bound
/// (n = 0 is the lowest).
///
/// # Safety
///
/// `solver` must be null or a live handle from [`hl_solver_new`].
#[no_mangle]
pub unsafe extern "C" fn hl_solver_state_count(solver: *const HlSolver) -> usize {
    solver
        .as_ref()
        .and_then(|s| s.solved.as_ref())
        .map_or(0, |r| r.states.len())
}

/// Exponential slope λₙ < 0 of bound state `n`; written to `*out`.
///
/// # Safety
///
/// `solver` must be a live handle; `out` must point to writable memory
/// for one `f64`.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_lambda(
    solver: *const HlSolver,
    n: usize,
    out: *mut f64,
) -> HlStatus {
    let Some(solver) = solver.as_ref() else {
        return HlStatus::NullArgument;
    };
    if out.is_null() {
        return HlStatus::NullArgument;
    }
    let Some(result) = solver.solved.as_ref() else {
        return HlStatus::NotSolved;
    };
    match result.states.get(n) {
        Some(state) => {
            *out = state.lambda;
            HlStatus::Ok
        }
        None => HlStatus::OutOfRange,
    }
}

/// Energy Eₙ = −½λₙ² of bound state `n` in Hartree; written to `*out`.
///
/// # Safety
///
/// `solver` must be a live handle; `out` must point to writable memory
/// for one `f64`.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_energy(
    solver: *const HlSolver,
    n: usize,
    out: *mut f64,
) -> HlStatus {
    let Some(solver) = solver.as_ref() else {
        return HlStatus::NullArgument;
    };
    if out.is_null() {
        return HlStatus::NullArgument;
    }
    let Some(result) = solver.solved.as_ref() else {
        return HlStatus::NotSolved;
    };
    match result.states.get(n) {
        Some(state) => {
            *out = state.energy;
            HlStatus::Ok
        }
        None => HlStatus::OutOfRange,
    }
}

/// Channel coefficients of bound state `n`: unit 2-norm, sign-fixed, one
/// per basis channel in enumeration order (label channels with
/// [`hl_solver_channel`]). Copies [`hl_solver_basis_size`] values into
/// `out`; `len` is the capacity of `out` and must be at least that size.
///
/// # Safety
///
/// `solver` must be a live handle; `out` must point to writable memory
/// for at least `len` `f64` values.
#[no_mangle]
pub unsafe extern "C" fn hl_solver_coefficients(
    solver: *const HlSolver,
    n: usize,
    out: *mut f64,
    len: usize,
) -> HlStatus {
    let Some(solver) = solver.as_ref() else {
        return HlStatus::NullArgument;
    };
    if out.is_null() {
        return HlStatus::NullArgument;
    }
    let Some(result) = solver.solved.as_ref() else {
        return HlStatus::NotSolved;
    };
    let Some(state) = result.states.get(n) else {
        return HlStatus::OutOfRange;
    };
    if len < state.c.len() {
        return HlStatus::OutOfRange;
    }
    ptr::copy_nonoverlapping(state.c.as_ptr(), out, state.c.len());
    HlStatus::Ok
}

/// Static, NUL-terminated name for a status code (the integer value of an
/// [`HlStatus`]); unknown values map to `"unknown status"`. Never free
/// the returned pointer.
#[no_mangle]
pub extern "C" fn hl_status_name(status: i32) -> *const c_char {
    let name: &'static str = match status {
        0 => "ok\0",
        1 => "internal error\0",
        2 => "config error\0",
        3 => "no bound state\0",
        4 => "cache corrupt\0",
        5 => "null argument\0",
        6 => "not solved\0",
        7 => "out of range\0",
        _ => "unknown status\0",
    };
    name.as_ptr() as *const c_char
}

/// Library version as a static, NUL-terminated string. Never free the
/// returned pointer.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
