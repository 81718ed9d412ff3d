//! Spectral diagnostics for inertial manifolds of dissipative reaction-diffusion
//! equations on boxes.
//!
//! The crate is organised around four analyses:
//!
//! - [`lattice_spectrum`]: Laplacian spectra on 1/2/3-dimensional boxes, gap
//!   statistics, the spectral jump condition and the three-square gap audit.
//! - [`reaction_field`]: planar polynomial reaction fields, their fixed points and
//!   the eigenvalue-splitting invariant `delta(p) = |Re(xi1 - xi2)|`.
//! - [`stationary_spectrum`]: spectra of linearizations `f'(p) + nu*Laplacian` at
//!   homogeneous equilibria, unstable indices, mode-count profiles and
//!   finite-cutoff obstruction certificates.
//! - [`spatial_averaging`]: windowed compressions of mean-free multiplication
//!   operators in the box eigenbasis and their operator norms.

pub mod error;
pub mod lattice_spectrum;
pub mod linalg;
pub mod reaction_field;
pub mod spatial_averaging;
pub mod stationary_spectrum;

pub use error::{Error, ErrorClass, Result};
