//! Spectral solver for leaky quantum wires with periodically modulated coupling.
//!
//! A "leaky wire" is a singular attractive interaction supported on a straight
//! line in R^3, formally -Δ + σ(x) δ(|y|), with a bounded 2π-periodic coupling
//! σ along the line. This crate computes the guided-mode spectra of the fiber
//! operators H(k) obtained from the Bloch-Floquet decomposition, for two models:
//!
//! * a single line in R^3 ([`fiber_line`]), and
//! * an infinite periodic family of parallel lines in a plane, a "grating"
//!   ([`fiber_grating`]).
//!
//! Eigenvalues of H(k) are located as zero crossings of the eigenvalue branches
//! of a boundary operator A(λ,k) = diag(α_n(λ,k)) + σ, assembled in the Fourier
//! basis of the coupling period. The diagonal symbol is logarithmic for the
//! single line and a renormalized lattice sum t(z,k₂) for the grating.
//! [`band_sweep`] aggregates per-k spectra into dispersion curves and a gap
//! report for the full operator.

pub mod band_sweep;
pub mod coupling;
pub mod fiber_grating;
pub mod fiber_line;
pub mod hermlin;
pub mod specfun;
pub mod verify;

mod quad;
mod search;

pub use coupling::CouplingFunction;
pub use hermlin::{Bracket, HermitianMatrix};
