//! Error type shared across the solver.

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Term label violates the supported symmetry sectors.
    #[error("invalid term: {0}")]
    InvalidTerm(String),

    /// Harmonic index violates the symmetry rules of its term.
    #[error("invalid harmonic index: {0}")]
    InvalidIndex(String),

    /// Basis construction failed (empty list, duplicates, bad Kmax, ...).
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    /// Finite-difference grid touches the coordinate endpoints.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Doubling the angular quadrature still moves matrix elements.
    #[error(
        "quadrature not converged: max |ΔW| = {max_delta:.3e} between {eta_nodes} and {} η nodes",
        .eta_nodes * 2
    )]
    QuadratureNotConverged { eta_nodes: u32, max_delta: f64 },

    /// Lowest spectral eigenvalue is non-negative: no bound state at this rung.
    #[error("no bound state at rung {rung} (lowest eigenvalue {lambda:.6e} >= 0)")]
    NoBoundState { rung: u32, lambda: f64 },

    /// Iterative eigensolver failed to converge (should not happen at sane sizes).
    #[error("eigensolver failed: {0}")]
    EigenFailed(String),

    /// Variational scan found no self-consistent exponent in the bracket.
    #[error("no fixed point for lambda in ({lo:.3}, {hi:.3})")]
    NoFixedPoint { lo: f64, hi: f64 },

    /// Gram matrix of states is numerically singular; cannot orthogonalize.
    #[error("degenerate or duplicated states: {0}")]
    DegenerateStates(String),

    /// Run configuration failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Cache file exists but is unreadable or inconsistent.
    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: config errors 2, missing bound state 3,
    /// cache corruption 4, anything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidTerm(_)
            | Error::InvalidIndex(_)
            | Error::InvalidBasis(_) => 2,
            Error::NoBoundState { .. } => 3,
            Error::CacheCorrupt(_) => 4,
            _ => 1,
        }
    }
}
