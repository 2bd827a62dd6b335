//! Spectral simulator and verification harness for the half-wave equation
//! `i ∂_t ψ = (|p| + V) ψ` on the radial half-line.
//!
//! The library is organised bottom-up:
//!
//! * [`grid`] — radial grids, the orthonormal sine transform, sampled states;
//! * [`operators`] — matrix-free `|p|^α`, `V`, `H`, the dilation generator `A` and the
//!   dilation group, plus the potential catalog;
//! * [`funcalc`] — smoothed cutoffs, dyadic partitions, `f(H)` by Chebyshev expansion,
//!   `f(A)` by the Mellin transform, and commutator expansions;
//! * [`oracle`] — dense reference matrices and exact functional calculus;
//! * [`dynamics`] — state preparation, split-step propagation, observables;
//! * [`estimates`] — numerical certificates for static operator inequalities;
//! * [`experiments`] — configured end-to-end runs, reports and the CLI.

pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod experiments;
mod floats;
pub mod funcalc;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};
pub use grid::{build_radial_grid, RadialGrid, SpectralCoefficients, WaveFunction, C64};
