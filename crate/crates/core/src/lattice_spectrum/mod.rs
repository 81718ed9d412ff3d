//! Laplacian spectra on boxes and the gap conditions built on them.
//!
//! On a box with sides `pi*a_j` the Dirichlet, Neumann and periodic spectra
//! are `sum_j (s*l_j/a_j)^2` with `l_j >= 1`, `l_j >= 0` and `l_j` in Z
//! respectively (`s = 1` except for standard periodic scaling, where `s = 2`).
//! When every side is exactly `pi` the eigenvalues are integers and their
//! multiplicities are counted exactly.

mod audit;
mod domain;
mod gaps;
mod spectrum;
mod weyl;

pub use audit::{is_gauss_excluded, three_square_gap_audit, ThreeSquareAudit};
pub use domain::{BoundaryCondition, BoxDomain, PeriodicScaling};
pub use gaps::{gap_stats, jump_condition_scan, GapReport, JumpQuery, JumpReport};
pub use spectrum::{
    enumerate_spectrum, enumerate_spectrum_with_budget, lattice_modes, LatticeMode, SpectralEntry, Spectrum,
    DEFAULT_LATTICE_BUDGET, MERGE_RTOL,
};
pub use weyl::{weyl_fit, WeylFit};

pub(crate) use spectrum::merge_sorted;
