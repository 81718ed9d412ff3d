//! Planar polynomial reaction fields: fixed points, Jacobian eigenvalues and
//! the invariant `delta(p) = |Re(xi1 - xi2)|`, the four-point obstruction
//! check, and the two named cubic constructions.

mod analysis;
mod families;
mod field;
mod surd;

pub use analysis::{
    delta_of, eigen2, fixed_points, lemma33_check, lemma33_from_points, write_delta_csv, ExactAnalysis,
    FixedPointAnalysis, Lemma33Match, Lemma33Report, Region, DEFAULT_DEDUP_TOL, DEFAULT_LEMMA33_TOL,
    DELTA_RESIDUAL_TOL, LEMMA33_DISTINCT, NEWTON_GRID, NEWTON_MAX_ITERS,
};
pub use families::{
    dissipativity_radius, invariant_region_check, prop34_b, prop34_field, prop34_k, prop34_phi, prop35_field,
    solve_prop34, solve_prop34_in, verify_prop35, DissipativityReport, Prop34Checklist, Prop34Constants, Prop35Report,
    RegionCheck, DISSIPATIVITY_SAMPLES, PROP34_BRACKET,
};
pub use field::{NamedPoint, Param, PlanarField, PolyTerm, MAX_POLY_DEGREE};
pub use surd::Surd;
