//! Spectra of linearizations at spatially homogeneous equilibria.
//!
//! At a constant equilibrium the linearized operator `jac + nu * Laplacian`
//! splits over Laplacian eigenmodes, so its spectrum is `xi_i - nu * lambda_n`
//! for the Jacobian eigenvalues `xi_i`. Everything here works with the real
//! parts of that spectrum truncated at a Laplacian cutoff, and every count is
//! only claimed above the level where truncation could hide eigenvalues.

mod certificate;
mod profile;

pub use certificate::{
    anhim_common_gamma, anhim_common_gamma_with, lemma41_threshold, nhim_common_dims, nhim_feasible_dims,
    CertificateMode, CertificateResult, FeasibleDims, Lemma41Threshold, NhimIntersection, ObstructionCertificate,
    Witness, CAVEAT, DEFAULT_GAP_MIN,
};
pub use profile::{
    count_profile, count_profile_from, operator_spectrum, operator_spectrum_from, parity_report, required_cutoff,
    unstable_index, unstable_index_from, Breakpoint, Linearization, ModeCountProfile, OperatorSpectrum, ParityPair,
    ParityReport, UnstableIndex, DEFAULT_ZERO_TOL,
};
