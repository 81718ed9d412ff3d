use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Self::Dirichlet),
            "neumann" | "n" => Ok(Self::Neumann),
            "periodic" | "p" => Ok(Self::Periodic),
            other => Err(format!(
                "unknown boundary condition `{other}` (expected dirichlet, neumann or periodic)"
            )),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
        })
    }
}

/// How periodic frequencies are scaled on a box of side `pi*a`.
///
/// `Unit` takes frequencies `l/a`, `l` in Z, so the periodic pi-cube has
/// the integer sums of three squares as its spectrum. `Standard` is the
/// true pi-periodic spectrum with frequencies `2l/a`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicScaling {
    #[default]
    #[serde(alias = "paper")]
    Unit,
    Standard,
}

impl FromStr for PeriodicScaling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unit" | "paper" => Ok(Self::Unit),
            "standard" => Ok(Self::Standard),
            other => Err(format!(
                "unknown periodic scaling `{other}` (expected unit or standard)"
            )),
        }
    }
}

/// An axis-aligned box `(0, s_1) x ... x (0, s_m)` with `m <= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxDomainRepr")]
pub struct BoxDomain {
    sides: Vec<f64>,
    bc: BoundaryCondition,
    #[serde(default)]
    periodic_scaling: PeriodicScaling,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDomainRepr {
    sides: Vec<f64>,
    bc: BoundaryCondition,
    #[serde(default)]
    periodic_scaling: PeriodicScaling,
}

impl TryFrom<BoxDomainRepr> for BoxDomain {
    type Error = crate::error::Error;

    fn try_from(r: BoxDomainRepr) -> Result<Self> {
        Ok(Self::new(r.sides, r.bc)?.with_periodic_scaling(r.periodic_scaling))
    }
}

impl BoxDomain {
    pub fn new(sides: Vec<f64>, bc: BoundaryCondition) -> Result<Self> {
        if sides.is_empty() || sides.len() > 3 {
            return Err(precondition(format!(
                "box dimension must be 1, 2 or 3 (got {})",
                sides.len()
            )));
        }
        if let Some(s) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(precondition(format!("box sides must be positive (got {s})")));
        }
        Ok(Self {
            sides,
            bc,
            periodic_scaling: PeriodicScaling::Unit,
        })
    }

    /// The cube `(0, pi)^dim`.
    pub fn pi_cube(dim: usize, bc: BoundaryCondition) -> Result<Self> {
        Self::new(vec![PI; dim], bc)
    }

    pub fn with_periodic_scaling(mut self, scaling: PeriodicScaling) -> Self {
        self.periodic_scaling = scaling;
        self
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn periodic_scaling(&self) -> PeriodicScaling {
        self.periodic_scaling
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Frequency multiplier `s` so that mode `l` on axis `j` has frequency `s*l/a_j`.
    pub(crate) fn frequency_scale(&self) -> f64 {
        match (self.bc, self.periodic_scaling) {
            (BoundaryCondition::Periodic, PeriodicScaling::Standard) => 2.0,
            _ => 1.0,
        }
    }

    /// Angular frequency of mode `l` along `axis`.
    pub(crate) fn frequency(&self, axis: usize, l: i64) -> f64 {
        self.frequency_scale() * l as f64 * PI / self.sides[axis]
    }

    /// Eigenvalue contribution `(s*l/a_j)^2` of mode `l` along `axis`.
    pub(crate) fn axis_eigenvalue(&self, axis: usize, l: i64) -> f64 {
        let w = self.frequency(axis, l);
        w * w
    }

    /// Smallest admissible non-negative mode index along every axis.
    pub(crate) fn first_mode(&self) -> i64 {
        match self.bc {
            BoundaryCondition::Dirichlet => 1,
            _ => 0,
        }
    }

    /// Number of eigenfunctions sharing the non-negative index `l` on one axis
    /// (periodic modes `+l` and `-l` are distinct).
    pub(crate) fn axis_multiplicity(&self, l: i64) -> u64 {
        if self.bc == BoundaryCondition::Periodic && l != 0 {
            2
        } else {
            1
        }
    }

    /// Integer weight per axis when every side is exactly `pi`; eigenvalues are
    /// then integers `sum w * l^2`.
    pub(crate) fn integer_weight(&self) -> Option<u64> {
        if self.sides.iter().all(|&s| s == PI) {
            let s = self.frequency_scale() as u64;
            Some(s * s)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deserialization_validates() {
        let d: BoxDomain = serde_json::from_str(r#"{"sides":[1.0,2.0],"bc":"neumann"}"#).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(serde_json::from_str::<BoxDomain>(r#"{"sides":[-1.0],"bc":"neumann"}"#).is_err());
        assert!(serde_json::from_str::<BoxDomain>(r#"{"sides":[1.0],"bc":"neumann","x":1}"#).is_err());
    }

    #[test]
    fn rejects_bad_sides() {
        assert!(BoxDomain::new(vec![], BoundaryCondition::Neumann).is_err());
        assert!(BoxDomain::new(vec![1.0; 4], BoundaryCondition::Neumann).is_err());
        assert!(BoxDomain::new(vec![1.0, -1.0], BoundaryCondition::Neumann).is_err());
        assert!(BoxDomain::new(vec![1.0, f64::NAN], BoundaryCondition::Neumann).is_err());
    }

    #[test]
    fn periodic_scaling_changes_frequencies() {
        let unit = BoxDomain::pi_cube(1, BoundaryCondition::Periodic).unwrap();
        let standard = unit.clone().with_periodic_scaling(PeriodicScaling::Standard);
        assert_eq!(unit.axis_eigenvalue(0, 3), 9.0);
        assert_eq!(standard.axis_eigenvalue(0, 3), 36.0);
        assert_eq!(unit.integer_weight(), Some(1));
        assert_eq!(standard.integer_weight(), Some(4));
    }

    #[test]
    fn parses_boundary_names() {
        assert_eq!(
            "Neumann".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::Neumann
        );
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }
}
