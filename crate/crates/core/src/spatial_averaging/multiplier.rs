use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::lattice_spectrum::{BoundaryCondition, BoxDomain};

/// One cosine term `value * prod_j cos(w_j(k_j) x_j)`, where `w_j(k)` is the
/// angular frequency of Laplacian mode `k` on axis `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub freq: Vec<u32>,
    pub value: f64,
}

/// A band-limited real function on a Neumann or periodic box, stored as a
/// finite cosine series. Periodic multipliers are even in every variable,
/// which keeps the windowed matrices real symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultiplierFile", into = "MultiplierFile")]
pub struct Multiplier {
    domain: BoxDomain,
    coeffs: Vec<Coefficient>,
}

/// On-disk form: `{"domain": ..., "coeffs": [[k1, ..., k_dim, value], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultiplierFile {
    domain: BoxDomain,
    coeffs: Vec<Vec<f64>>,
}

impl TryFrom<MultiplierFile> for Multiplier {
    type Error = Error;

    fn try_from(f: MultiplierFile) -> Result<Self> {
        let dim = f.domain.dim();
        let mut coeffs = Vec::with_capacity(f.coeffs.len());
        for row in &f.coeffs {
            if row.len() != dim + 1 {
                return Err(precondition(format!(
                    "coefficient rows need {} frequencies and a value (got {} numbers)",
                    dim,
                    row.len()
                )));
            }
            let mut freq = Vec::with_capacity(dim);
            for &k in &row[..dim] {
                if !(k >= 0.0 && k.fract() == 0.0 && k <= u32::MAX as f64) {
                    return Err(precondition(format!(
                        "frequencies must be non-negative integers (got {k})"
                    )));
                }
                freq.push(k as u32);
            }
            coeffs.push(Coefficient { freq, value: row[dim] });
        }
        Multiplier::new(f.domain, coeffs)
    }
}

impl From<Multiplier> for MultiplierFile {
    fn from(m: Multiplier) -> Self {
        let coeffs = m
            .coeffs
            .iter()
            .map(|c| c.freq.iter().map(|&k| k as f64).chain([c.value]).collect())
            .collect();
        Self {
            domain: m.domain,
            coeffs,
        }
    }
}

impl Multiplier {
    pub fn new(domain: BoxDomain, mut coeffs: Vec<Coefficient>) -> Result<Self> {
        if domain.bc() == BoundaryCondition::Dirichlet {
            return Err(precondition("multipliers are defined on Neumann or periodic boxes"));
        }
        for c in &coeffs {
            if c.freq.len() != domain.dim() {
                return Err(precondition(format!(
                    "frequency {:?} does not match the domain dimension {}",
                    c.freq,
                    domain.dim()
                )));
            }
            if !c.value.is_finite() {
                return Err(precondition("coefficients must be finite"));
            }
        }
        coeffs.sort_by(|a, b| a.freq.cmp(&b.freq));
        if let Some(w) = coeffs.windows(2).find(|w| w[0].freq == w[1].freq) {
            return Err(precondition(format!("frequency {:?} listed twice", w[0].freq)));
        }
        Ok(Self { domain, coeffs })
    }

    /// Builds from `(frequency, value)` pairs.
    pub fn from_terms(domain: BoxDomain, terms: &[(&[u32], f64)]) -> Result<Self> {
        let coeffs = terms
            .iter()
            .map(|(f, v)| Coefficient {
                freq: f.to_vec(),
                value: *v,
            })
            .collect();
        Self::new(domain, coeffs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// Largest frequency index on any axis.
    pub fn max_frequency(&self) -> u32 {
        self.coeffs
            .iter()
            .flat_map(|c| c.freq.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Average over the domain: the zero-frequency coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs
            .iter()
            .find(|c| c.freq.iter().all(|&k| k == 0))
            .map_or(0.0, |c| c.value)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Coefficient {
                freq: c.freq.clone(),
                value: c.value * factor,
            })
            .collect();
        Self {
            domain: self.domain.clone(),
            coeffs,
        }
    }

    /// `h + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        match coeffs.iter_mut().find(|c| c.freq.iter().all(|&k| k == 0)) {
            Some(c) => c.value += shift,
            None => coeffs.push(Coefficient {
                freq: vec![0; self.domain.dim()],
                value: shift,
            }),
        }
        coeffs.sort_by(|a, b| a.freq.cmp(&b.freq));
        Self {
            domain: self.domain.clone(),
            coeffs,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|c| {
                c.value
                    * c.freq
                        .iter()
                        .enumerate()
                        .map(|(j, &k)| (self.domain.frequency(j, k as i64) * x[j]).cos())
                        .product::<f64>()
            })
            .sum()
    }

    /// Length of the integration cell along `axis`: the side for Neumann
    /// boxes and the fundamental period for periodic ones.
    pub fn cell_length(&self, axis: usize) -> f64 {
        match self.domain.bc() {
            BoundaryCondition::Periodic => 2.0 * std::f64::consts::PI / self.domain.frequency(axis, 1),
            _ => self.domain.sides()[axis],
        }
    }

    /// Weights `(lambda_k, |c_k|^2)` of each term in an orthonormal eigenbasis.
    fn spectral_weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coeffs.iter().map(|c| {
            let mut lambda = 0.0;
            let mut norm_sq = c.value * c.value;
            for (j, &k) in c.freq.iter().enumerate() {
                lambda += self.domain.axis_eigenvalue(j, k as i64);
                norm_sq *= self.cell_length(j) * if k == 0 { 1.0 } else { 0.5 };
            }
            (lambda, norm_sq)
        })
    }

    /// `(sum (1 + lambda)^2 |c_lambda|^2)^(1/2)` over orthonormal eigenbasis coefficients.
    pub fn h2_norm(&self) -> f64 {
        self.spectral_weights()
            .map(|(l, w)| (1.0 + l).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.spectral_weights().map(|(_, w)| w).sum::<f64>().sqrt()
    }
}
