//! Windowed compressions of multiplication operators.
//!
//! For a band-limited multiplier `h` and a window `(lambda - k, lambda + k]`
//! of Laplacian eigenvalues, the operator `P (h - mean h) P` is assembled in
//! the orthonormal eigenbasis from closed-form products of cosines, and its
//! norm is compared with the spectral H^2 norm of `h`.

mod multiplier;
mod window;

pub use multiplier::{Coefficient, Multiplier};
pub use window::{
    sap_scan, windowed_matrix, windowed_norm, write_sap_csv, SAPWindowReport, WindowedMatrix, H2_NORM_CONVENTION,
};
