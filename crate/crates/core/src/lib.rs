//! Bound-state spectra of Coulomb few-body systems (one- and two-electron
//! atoms/ions) by matrix factorization of the radial Hamiltonian in
//! hyperspherical coordinates.
//!
//! The wavefunction is expanded over hyperspherical harmonics; the hyperradial
//! problem is then solved either rung by rung with ladder (factorization)
//! matrices, or in closed form through a symmetric spectral matrix whose
//! lowest eigenvalue gives the bound-state exponent λ and energy E = −½λ².
//! One-electron ions reproduce the Bohr spectrum exactly; two-electron ¹S
//! states (helium-like) are variational in the basis truncation K ≤ Kmax.
//!
//! Atomic units (ℏ = m_e = e = 1) throughout; energies in Hartree.
//!
//! Module map:
//! - [`special`]: log-gamma, Legendre/Jacobi polynomials, factorials
//! - [`quadrature`]: Gauss–Legendre rules
//! - [`linalg`]: dense symmetric eigensolver (deterministic)
//! - [`hyperbasis`]: term labels, harmonic enumeration, Gram and Λ² checks
//! - [`potential`]: angular matrix of the Coulomb interaction, with cache
//! - [`ladder`]: factorization matrices β̂ₙ, α̂ₙ, âₙ and their identities
//! - [`spectral`]: spectral matrix Ã(n), energies, radial wavefunctions
//! - [`pipeline`]: config, run orchestration, reports, self-test

pub mod error;
pub mod hyperbasis;
pub mod ladder;
pub mod linalg;
pub mod pipeline;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
