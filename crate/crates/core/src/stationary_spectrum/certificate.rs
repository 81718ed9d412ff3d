use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::profile::{check_shared, count_profile_from, Linearization, ModeCountProfile};
use crate::error::{precondition, Error, Result};
use crate::lattice_spectrum::{enumerate_spectrum, MERGE_RTOL};

/// Minimum width of a gap that can host a spectral cut.
pub const DEFAULT_GAP_MIN: f64 = 1e-6;

pub const CAVEAT: &str = "valid up to cutoff";

/// An open interval of cuts `gamma` with the common mode count `n` above them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub n: u64,
}

impl Witness {
    pub fn width(&self) -> f64 {
        self.gamma_hi - self.gamma_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.gamma_lo + self.gamma_hi)
    }

    /// Every profile has no breakpoint in `(gamma_lo, gamma_hi)`, is exact
    /// there, and counts exactly `n` modes above it.
    pub fn verify(&self, profiles: &[ModeCountProfile]) -> bool {
        let mid = self.midpoint();
        self.gamma_lo < self.gamma_hi
            && self.gamma_hi <= 0.0
            && profiles.iter().all(|p| {
                p.is_exact_at(self.gamma_lo) && p.is_gap(self.gamma_lo, self.gamma_hi) && p.count_at(mid) == self.n
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CertificateMode {
    Nhim,
    Anhim,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateResult {
    /// No admissible cut up to the cutoff.
    Empty,
    Witness(Witness),
}

/// Outcome of the common-cut scan over several equilibria.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionCertificate {
    pub mode: CertificateMode,
    pub cutoff: f64,
    pub result: CertificateResult,
    pub equilibria: Vec<String>,
    /// Every admissible interval, sorted by `gamma` descending.
    pub witnesses: Vec<Witness>,
    /// Cuts below this value were not examined.
    pub floor: f64,
}

impl ObstructionCertificate {
    pub fn is_empty(&self) -> bool {
        self.result == CertificateResult::Empty
    }
}

impl Serialize for ObstructionCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("mode", &self.mode)?;
        m.serialize_entry("cutoff", &self.cutoff)?;
        match &self.result {
            CertificateResult::Empty => m.serialize_entry("result", "empty")?,
            CertificateResult::Witness(w) => m.serialize_entry("result", w)?,
        }
        m.serialize_entry("equilibria", &self.equilibria)?;
        m.serialize_entry("caveat", CAVEAT)?;
        m.serialize_entry("floor", &self.floor)?;
        m.serialize_entry("witnesses", &self.witnesses)?;
        m.end()
    }
}

fn profiles_for(lins: &[Linearization], cutoff: f64) -> Result<Vec<ModeCountProfile>> {
    check_shared(lins)?;
    let first = lins
        .first()
        .ok_or_else(|| precondition("at least one linearization is required"))?;
    let laplacian = enumerate_spectrum(&first.domain, cutoff)?;
    Ok(lins.par_iter().map(|l| count_profile_from(l, &laplacian)).collect())
}

/// Intervals `(lo, hi)` with `lo < 0`, `lo >= floor`, width `>= gap_min`,
/// between consecutive values of the merged, descending breakpoint list.
fn candidate_intervals(profiles: &[ModeCountProfile], floor: f64, gap_min: f64, clip: bool) -> Vec<(f64, f64)> {
    let mut values: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.breakpoints.iter().map(|b| b.value))
        .filter(|&v| v >= floor)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup_by(|b, a| (*a - *b).abs() <= MERGE_RTOL * (1.0 + a.abs()));

    let mut out = Vec::new();
    let mut hi = f64::INFINITY;
    for &lo in &values {
        if lo < 0.0 {
            let top = if clip { hi.min(0.0) } else { hi };
            if top - lo >= gap_min {
                out.push((lo, top));
            }
        }
        hi = lo;
    }
    out
}

/// Cuts `gamma < 0` lying in a gap of every profile with one common mode
/// count. The headline witness is the widest interval (ties to the one nearest 0).
pub fn anhim_common_gamma(lins: &[Linearization], cutoff: f64) -> Result<ObstructionCertificate> {
    anhim_common_gamma_with(lins, cutoff, DEFAULT_GAP_MIN)
}

pub fn anhim_common_gamma_with(lins: &[Linearization], cutoff: f64, gap_min: f64) -> Result<ObstructionCertificate> {
    if lins.len() < 2 {
        return Err(precondition("the common-cut scan needs at least two equilibria"));
    }
    if !(gap_min > 0.0) {
        return Err(precondition(format!("gap_min must be positive (got {gap_min})")));
    }
    let profiles = profiles_for(lins, cutoff)?;
    let floor = profiles.iter().map(|p| p.floor).fold(f64::NEG_INFINITY, f64::max);

    let mut witnesses = Vec::new();
    for (lo, hi) in candidate_intervals(&profiles, floor, gap_min, true) {
        let mid = 0.5 * (lo + hi);
        let n = profiles[0].count_at(mid);
        if profiles.iter().all(|p| p.count_at(mid) == n) {
            witnesses.push(Witness {
                gamma_lo: lo,
                gamma_hi: hi,
                n,
            });
        }
    }
    for w in &witnesses {
        if !w.verify(&profiles) {
            return Err(Error::Consistency(format!("witness {w:?} failed verification")));
        }
    }
    // Descending order means the first of equal widths is the one nearest 0.
    let headline = witnesses
        .iter()
        .copied()
        .reduce(|best, w| if w.width() > best.width() { w } else { best });

    Ok(ObstructionCertificate {
        mode: CertificateMode::Anhim,
        cutoff,
        result: headline.map_or(CertificateResult::Empty, CertificateResult::Witness),
        equilibria: lins.iter().map(|l| l.label.clone()).collect(),
        witnesses,
        floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleDims {
    pub label: String,
    /// Mode counts `n` realized by some cut `gamma < 0` in a gap of width `>= gap_min`.
    pub dims: Vec<u64>,
    /// Counts above this are not decided at the current cutoff.
    pub max_certified: u64,
    pub floor: f64,
    pub cutoff: f64,
}

pub fn nhim_feasible_dims(lin: &Linearization, cutoff: f64, gap_min: f64) -> Result<FeasibleDims> {
    if !(gap_min > 0.0) {
        return Err(precondition(format!("gap_min must be positive (got {gap_min})")));
    }
    let profile = profiles_for(std::slice::from_ref(lin), cutoff)?.remove(0);
    Ok(feasible_from_profile(&profile, gap_min))
}

fn feasible_from_profile(profile: &ModeCountProfile, gap_min: f64) -> FeasibleDims {
    let mut dims: Vec<u64> = candidate_intervals(std::slice::from_ref(profile), profile.floor, gap_min, false)
        .into_iter()
        .map(|(lo, _)| profile.count_strictly_above(lo))
        .collect();
    dims.sort_unstable();
    dims.dedup();
    FeasibleDims {
        label: profile.label.clone(),
        dims,
        max_certified: profile.breakpoints.last().map_or(0, |b| b.count),
        floor: profile.floor,
        cutoff: profile.cutoff,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NhimIntersection {
    pub mode: CertificateMode,
    pub cutoff: f64,
    pub per_equilibrium: Vec<FeasibleDims>,
    /// Dimensions feasible at every equilibrium, up to `bound`.
    pub common: Vec<u64>,
    pub bound: u64,
    pub empty: bool,
    pub caveat: &'static str,
}

/// Intersection of per-equilibrium feasible dimensions: a manifold of
/// dimension `n` needs a cut realizing `n` at each equilibrium, each with its own `gamma`.
pub fn nhim_common_dims(lins: &[Linearization], cutoff: f64, gap_min: f64) -> Result<NhimIntersection> {
    if !(gap_min > 0.0) {
        return Err(precondition(format!("gap_min must be positive (got {gap_min})")));
    }
    let profiles = profiles_for(lins, cutoff)?;
    let per_equilibrium: Vec<FeasibleDims> = profiles.iter().map(|p| feasible_from_profile(p, gap_min)).collect();
    let bound = per_equilibrium.iter().map(|f| f.max_certified).min().unwrap_or(0);
    let common: Vec<u64> = per_equilibrium[0]
        .dims
        .iter()
        .copied()
        .filter(|n| *n <= bound && per_equilibrium.iter().all(|f| f.dims.binary_search(n).is_ok()))
        .collect();
    Ok(NhimIntersection {
        mode: CertificateMode::Nhim,
        cutoff,
        empty: common.is_empty(),
        per_equilibrium,
        common,
        bound,
        caveat: CAVEAT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma41Threshold {
    /// Slope difference `f'(p0) - f'(p1)`.
    pub a: f64,
    pub gap_bound: f64,
    /// Nonexistence applies for `nu < nu_star = a / gap_bound`.
    pub nu_star: f64,
}

pub fn lemma41_threshold(slope0: f64, slope1: f64, gap_bound: f64) -> Result<Lemma41Threshold> {
    if !(gap_bound > 0.0 && gap_bound.is_finite()) {
        return Err(precondition(format!("gap bound must be positive (got {gap_bound})")));
    }
    let a = slope0 - slope1;
    if !(a > 0.0) {
        return Err(Error::HypothesisNotMet(format!(
            "slope difference f'(p0) - f'(p1) = {a} must be positive"
        )));
    }
    Ok(Lemma41Threshold {
        a,
        gap_bound,
        nu_star: a / gap_bound,
    })
}
