use serde::{Deserialize, Serialize};

use super::spectrum::Spectrum;
use crate::error::{precondition, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    /// Least-squares slope of `log lambda_n` against `log n`.
    pub exponent: f64,
    /// The asymptotic value `2 / dim`.
    pub expected: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: u64,
}

/// Fits `lambda_n ~ c n^p` over the upper half of the indices (with multiplicity).
pub fn weyl_fit(spectrum: &Spectrum, dim: usize) -> Result<WeylFit> {
    let total = spectrum.total_multiplicity();
    if total < 100 {
        return Err(precondition(format!(
            "Weyl fit needs at least 100 eigenvalues counted with multiplicity (got {total})"
        )));
    }
    if !(1..=3).contains(&dim) {
        return Err(precondition(format!("dimension must be 1, 2 or 3 (got {dim})")));
    }
    let first = total / 2 + 1;

    let mut xs = Vec::with_capacity((total - first + 1) as usize);
    let mut ys = Vec::with_capacity(xs.capacity());
    let mut n = 0u64;
    for e in spectrum.entries() {
        for _ in 0..e.multiplicity {
            n += 1;
            if n >= first && e.value > 0.0 {
                xs.push((n as f64).ln());
                ys.push(e.value.ln());
            }
        }
    }

    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();

    Ok(WeylFit {
        exponent: slope,
        expected: 2.0 / dim as f64,
        residual: (ss / m).sqrt(),
        points: xs.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{enumerate_spectrum, BoundaryCondition, BoxDomain};
    use super::*;

    #[test]
    fn interval_is_exactly_quadratic() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Dirichlet).unwrap();
        let fit = weyl_fit(&enumerate_spectrum(&d, 1e6).unwrap(), 1).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn too_few_entries() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Dirichlet).unwrap();
        assert!(weyl_fit(&enumerate_spectrum(&d, 50.0).unwrap(), 1).is_err());
    }
}
