use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::lattice_spectrum::{enumerate_spectrum, merge_sorted, BoxDomain, SpectralEntry, Spectrum};
use crate::reaction_field::eigen2;

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Linearization at a spatially homogeneous equilibrium: `jac + nu * Laplacian`
/// on `domain`, diagonalized mode by mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linearization {
    pub domain: BoxDomain,
    pub nu: f64,
    /// 1x1 or 2x2 Jacobian of the reaction term at the equilibrium.
    pub jac: Vec<Vec<f64>>,
    pub label: String,
    /// User assertion that the equilibrium belongs to the class the parity
    /// statement is about; never inferred.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_minus: Option<bool>,
}

impl Linearization {
    pub fn scalar(domain: BoxDomain, nu: f64, slope: f64, label: impl Into<String>) -> Result<Self> {
        Self::new(domain, nu, vec![vec![slope]], label)
    }

    pub fn planar(domain: BoxDomain, nu: f64, jac: [[f64; 2]; 2], label: impl Into<String>) -> Result<Self> {
        Self::new(domain, nu, jac.iter().map(|r| r.to_vec()).collect(), label)
    }

    pub fn new(domain: BoxDomain, nu: f64, jac: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        let lin = Self {
            domain,
            nu,
            jac,
            label: label.into(),
            e_minus: None,
        };
        lin.validate()?;
        Ok(lin)
    }

    pub fn with_e_minus(mut self, flag: bool) -> Self {
        self.e_minus = Some(flag);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(precondition(format!("nu must be positive (got {})", self.nu)));
        }
        let s = self.jac.len();
        if !(s == 1 || s == 2) || self.jac.iter().any(|r| r.len() != s) {
            return Err(precondition("jac must be a 1x1 or 2x2 matrix"));
        }
        if self.jac.iter().flatten().any(|x| !x.is_finite()) {
            return Err(precondition("jac entries must be finite"));
        }
        Ok(())
    }

    /// Real parts of the Jacobian eigenvalues with multiplicity; a conjugate
    /// pair counts twice at its common real part.
    pub fn local_real_parts(&self) -> Vec<(f64, u64)> {
        if self.jac.len() == 1 {
            return vec![(self.jac[0][0], 1)];
        }
        let j = [[self.jac[0][0], self.jac[0][1]], [self.jac[1][0], self.jac[1][1]]];
        let ([x1, x2], _) = eigen2(j);
        if x1.im != 0.0 || x1.re == x2.re {
            vec![(x1.re, 2)]
        } else {
            vec![(x1.re, 1), (x2.re, 1)]
        }
    }

    /// Largest local real part.
    pub fn top(&self) -> f64 {
        self.local_real_parts()
            .iter()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Below this value the truncated spectrum may be missing eigenvalues.
    pub fn floor(&self, cutoff: f64) -> f64 {
        self.top() - self.nu * cutoff
    }

    fn same_setting(&self, other: &Self) -> bool {
        self.domain == other.domain && self.nu == other.nu
    }
}

pub(crate) fn check_shared(lins: &[Linearization]) -> Result<()> {
    for l in lins {
        l.validate()?;
    }
    if let Some(first) = lins.first() {
        if let Some(bad) = lins.iter().find(|l| !l.same_setting(first)) {
            return Err(precondition(format!(
                "linearization `{}` does not share the domain and nu of `{}`",
                bad.label, first.label
            )));
        }
    }
    Ok(())
}

/// Real parts of the operator spectrum, descending, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpectrum {
    pub label: String,
    pub cutoff: f64,
    /// Counts of real parts `>= floor` are complete.
    pub floor: f64,
    pub entries: Vec<SpectralEntry>,
}

pub fn operator_spectrum(lin: &Linearization, cutoff: f64) -> Result<OperatorSpectrum> {
    lin.validate()?;
    let laplacian = enumerate_spectrum(&lin.domain, cutoff)?;
    Ok(operator_spectrum_from(lin, &laplacian))
}

/// As [`operator_spectrum`], reusing an enumerated Laplacian spectrum.
pub fn operator_spectrum_from(lin: &Linearization, laplacian: &Spectrum) -> OperatorSpectrum {
    let mut parts: Vec<(f64, u64)> = Vec::new();
    for (xi, m) in lin.local_real_parts() {
        for e in laplacian.entries() {
            parts.push((xi - lin.nu * e.value, m * e.multiplicity));
        }
    }
    parts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut entries = merge_sorted(parts);
    entries.reverse();
    OperatorSpectrum {
        label: lin.label.clone(),
        cutoff: laplacian.cutoff(),
        floor: lin.floor(laplacian.cutoff()),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnstableIndex {
    pub label: String,
    /// Number of real parts `> zero_tol`, with multiplicity.
    pub l: u64,
    /// No real part in `[-zero_tol, zero_tol]`.
    pub hyperbolic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_minus: Option<bool>,
}

/// Smallest cutoff that guarantees no positive real part is truncated.
pub fn required_cutoff(lin: &Linearization, zero_tol: f64) -> f64 {
    ((lin.top() + zero_tol) / lin.nu).max(0.0)
}

pub fn unstable_index(lin: &Linearization, cutoff: f64, zero_tol: f64) -> Result<UnstableIndex> {
    lin.validate()?;
    let laplacian = enumerate_spectrum(&lin.domain, cutoff)?;
    unstable_index_from(lin, &laplacian, zero_tol)
}

pub fn unstable_index_from(lin: &Linearization, laplacian: &Spectrum, zero_tol: f64) -> Result<UnstableIndex> {
    if !(zero_tol > 0.0) {
        return Err(precondition(format!("zero_tol must be positive (got {zero_tol})")));
    }
    if !(lin.floor(laplacian.cutoff()) < -zero_tol) {
        return Err(Error::CutoffTooSmall {
            cutoff: laplacian.cutoff(),
            required: required_cutoff(lin, zero_tol),
        });
    }
    let spec = operator_spectrum_from(lin, laplacian);
    let l = spec
        .entries
        .iter()
        .filter(|e| e.value > zero_tol)
        .map(|e| e.multiplicity)
        .sum();
    let hyperbolic = !spec.entries.iter().any(|e| e.value.abs() <= zero_tol);
    Ok(UnstableIndex {
        label: lin.label.clone(),
        l,
        hyperbolic,
        e_minus: lin.e_minus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParityPair {
    pub first: String,
    pub second: String,
    /// `l(first) - l(second)`.
    pub difference: i64,
    pub even: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParityReport {
    pub indices: Vec<UnstableIndex>,
    /// Pairs among hyperbolic equilibria only.
    pub pairs: Vec<ParityPair>,
}

pub fn parity_report(lins: &[Linearization], cutoff: f64, zero_tol: f64) -> Result<ParityReport> {
    check_shared(lins)?;
    let Some(first) = lins.first() else {
        return Ok(ParityReport {
            indices: Vec::new(),
            pairs: Vec::new(),
        });
    };
    let laplacian = enumerate_spectrum(&first.domain, cutoff)?;
    let indices = lins
        .iter()
        .map(|l| unstable_index_from(l, &laplacian, zero_tol))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for (i, a) in indices.iter().enumerate() {
        for b in &indices[i + 1..] {
            if a.hyperbolic && b.hyperbolic {
                let difference = a.l as i64 - b.l as i64;
                pairs.push(ParityPair {
                    first: a.label.clone(),
                    second: b.label.clone(),
                    difference,
                    even: difference % 2 == 0,
                });
            }
        }
    }
    Ok(ParityReport { indices, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub value: f64,
    /// Number of real parts `>= value`, with multiplicity.
    pub count: u64,
}

/// The step function `gamma -> #{real parts >= gamma}`, valid for `gamma >= floor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCountProfile {
    pub label: String,
    pub cutoff: f64,
    pub floor: f64,
    /// Descending distinct real parts `>= floor`.
    pub breakpoints: Vec<Breakpoint>,
}

impl ModeCountProfile {
    /// `#{Re >= gamma}`; exact for `gamma >= floor`.
    pub fn count_at(&self, gamma: f64) -> u64 {
        let idx = self.breakpoints.partition_point(|b| b.value >= gamma);
        if idx == 0 {
            0
        } else {
            self.breakpoints[idx - 1].count
        }
    }

    /// `#{Re > gamma}`.
    pub fn count_strictly_above(&self, gamma: f64) -> u64 {
        let idx = self.breakpoints.partition_point(|b| b.value > gamma);
        if idx == 0 {
            0
        } else {
            self.breakpoints[idx - 1].count
        }
    }

    pub fn is_exact_at(&self, gamma: f64) -> bool {
        gamma >= self.floor
    }

    /// Whether the open interval `(lo, hi)` contains no breakpoint.
    pub fn is_gap(&self, lo: f64, hi: f64) -> bool {
        !self.breakpoints.iter().any(|b| b.value > lo && b.value < hi)
    }
}

pub fn count_profile(lin: &Linearization, cutoff: f64) -> Result<ModeCountProfile> {
    lin.validate()?;
    let laplacian = enumerate_spectrum(&lin.domain, cutoff)?;
    Ok(count_profile_from(lin, &laplacian))
}

pub fn count_profile_from(lin: &Linearization, laplacian: &Spectrum) -> ModeCountProfile {
    let spec = operator_spectrum_from(lin, laplacian);
    let mut count = 0;
    let breakpoints = spec
        .entries
        .iter()
        .take_while(|e| e.value >= spec.floor)
        .map(|e| {
            count += e.multiplicity;
            Breakpoint { value: e.value, count }
        })
        .collect();
    ModeCountProfile {
        label: spec.label,
        cutoff: spec.cutoff,
        floor: spec.floor,
        breakpoints,
    }
}
