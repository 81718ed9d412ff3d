use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::multiplier::Multiplier;
use crate::error::{precondition, Error, Result};
use crate::lattice_spectrum::{enumerate_spectrum, lattice_modes, BoundaryCondition, LatticeMode};
use crate::linalg::{spectral_norm, SymmetricMatrix};

/// Recorded in every report: the Sobolev norm is realized spectrally.
pub const H2_NORM_CONVENTION: &str = "(sum over eigenmodes of (1+lambda)^2 |c|^2)^(1/2)";

/// The compressed, mean-subtracted multiplication operator on one spectral window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedMatrix {
    pub modes: Vec<LatticeMode>,
    pub matrix: SymmetricMatrix,
}

/// Neumann: `<e_m, cos(k x) e_n>` on one axis for orthonormal cosines,
/// `Z/4 * w(m) w(n)` with `Z` the number of vanishing `+-m +-n +-k` sums.
fn neumann_axis(m: i64, n: i64, k: i64) -> f64 {
    let z = [m + n + k, m + n - k, m - n + k, -m + n + k]
        .iter()
        .filter(|&&s| s == 0)
        .count() as f64;
    let w = |l: i64| if l == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    z / 4.0 * w(m) * w(n)
}

/// Periodic: `<e_m, cos(k x) e_n>` for orthonormal exponentials.
fn periodic_axis(m: i64, n: i64, k: i64) -> f64 {
    let d = (m - n).abs();
    match (d == k, k) {
        (false, _) => 0.0,
        (true, 0) => 1.0,
        (true, _) => 0.5,
    }
}

/// Matrix of `h - mean(h)` between the orthonormal eigenmodes with eigenvalue
/// in `(lambda - k, lambda + k]`.
pub fn windowed_matrix(h: &Multiplier, lambda: f64, k: f64) -> Result<WindowedMatrix> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(precondition(format!("window half-width k must be positive (got {k})")));
    }
    if !lambda.is_finite() {
        return Err(precondition("window centre must be finite"));
    }
    let (lo, hi) = (lambda - k, lambda + k);
    let modes = lattice_modes(h.domain(), lo, hi);
    if modes.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(WindowedMatrix {
        matrix: matrix_on(h, &modes),
        modes,
    })
}

fn matrix_on(h: &Multiplier, modes: &[LatticeMode]) -> SymmetricMatrix {
    let axis: fn(i64, i64, i64) -> f64 = match h.domain().bc() {
        BoundaryCondition::Periodic => periodic_axis,
        _ => neumann_axis,
    };
    let terms: Vec<_> = h.coeffs().iter().filter(|c| c.freq.iter().any(|&f| f != 0)).collect();
    let n = modes.len();
    let mut a = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let (mi, mj) = (&modes[i].index, &modes[j].index);
            let v: f64 = terms
                .iter()
                .map(|c| {
                    c.value
                        * c.freq
                            .iter()
                            .enumerate()
                            .map(|(ax, &f)| axis(mi[ax], mj[ax], f as i64))
                            .product::<f64>()
                })
                .sum();
            a.set(i, j, v);
        }
    }
    a
}

/// Operator norm of the windowed matrix.
pub fn windowed_norm(h: &Multiplier, lambda: f64, k: f64) -> Result<f64> {
    spectral_norm(&windowed_matrix(h, lambda, k)?.matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SAPWindowReport {
    pub lambda: f64,
    pub k: f64,
    pub window_modes: usize,
    pub op_norm: f64,
    pub h2_norm: f64,
    /// `op_norm / h2_norm`.
    pub eps_eff: f64,
    /// Width of the spectral gap whose midpoint is `lambda`.
    pub gap: f64,
    pub rho_ok: bool,
    pub h2_norm_convention: &'static str,
}

/// Evaluates the windowed norm at the midpoint of every spectral gap
/// `[lambda_n, lambda_{n+1})` of width `>= rho` with `lambda_n <= lambda_max`
/// and midpoint above `k`. Windows that contain no mode report norm 0.
/// Sorted by `eps_eff`, then `lambda`.
pub fn sap_scan(h: &Multiplier, k: f64, rho: f64, lambda_max: f64) -> Result<Vec<SAPWindowReport>> {
    if !(k > 0.0 && rho > 0.0) {
        return Err(precondition(format!(
            "k and rho must be positive (got k = {k}, rho = {rho})"
        )));
    }
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(precondition(format!(
            "lambda_max must be non-negative (got {lambda_max})"
        )));
    }
    // Extend the enumeration until some eigenvalue lies above lambda_max, so
    // the last gap is known.
    let mut reach = rho.max(1.0);
    let spectrum = loop {
        let s = enumerate_spectrum(h.domain(), lambda_max + reach)?;
        if s.entries().last().is_some_and(|e| e.value > lambda_max) {
            break s;
        }
        reach *= 2.0;
    };

    let gaps: Vec<(f64, f64)> = spectrum
        .entries()
        .windows(2)
        .filter(|w| w[0].value <= lambda_max && w[1].value - w[0].value >= rho)
        .map(|w| (w[0].value, w[1].value))
        .filter(|(a, b)| 0.5 * (a + b) > k)
        .collect();

    let h2 = h.h2_norm();
    let mut reports = gaps
        .par_iter()
        .map(|&(a, b)| {
            let lambda = 0.5 * (a + b);
            let (window_modes, op_norm) = match windowed_matrix(h, lambda, k) {
                Ok(w) => (w.modes.len(), spectral_norm(&w.matrix)?),
                Err(Error::EmptyWindow { .. }) => (0, 0.0),
                Err(e) => return Err(e),
            };
            Ok(SAPWindowReport {
                lambda,
                k,
                window_modes,
                op_norm,
                h2_norm: h2,
                eps_eff: if h2 > 0.0 { op_norm / h2 } else { 0.0 },
                gap: b - a,
                rho_ok: b - a >= rho,
                h2_norm_convention: H2_NORM_CONVENTION,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|x, y| x.eps_eff.total_cmp(&y.eps_eff).then(x.lambda.total_cmp(&y.lambda)));
    Ok(reports)
}

/// Writes `lambda,k,window_modes,op_norm,h2_norm,eps_eff,gap,rho_ok`.
pub fn write_sap_csv<W: Write>(reports: &[SAPWindowReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "lambda",
        "k",
        "window_modes",
        "op_norm",
        "h2_norm",
        "eps_eff",
        "gap",
        "rho_ok",
    ])?;
    for r in reports {
        w.write_record([
            r.lambda.to_string(),
            r.k.to_string(),
            r.window_modes.to_string(),
            r.op_norm.to_string(),
            r.h2_norm.to_string(),
            r.eps_eff.to_string(),
            r.gap.to_string(),
            r.rho_ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_spectrum::BoxDomain;

    fn cube() -> BoxDomain {
        BoxDomain::pi_cube(3, BoundaryCondition::Neumann).unwrap()
    }

    fn cos_x1() -> Multiplier {
        Multiplier::from_terms(cube(), &[(&[1, 0, 0], 1.0)]).unwrap()
    }

    #[test]
    fn constant_gives_zero_matrix() {
        let h = Multiplier::from_terms(cube(), &[(&[0, 0, 0], 5.0)]).unwrap();
        let w = windowed_matrix(&h, 20.0, 3.0).unwrap();
        assert_eq!(w.matrix.frobenius_norm(), 0.0);
        assert_eq!(windowed_norm(&h, 20.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn coupling_between_neighbouring_modes() {
        // (3,0,0) at 9 and (4,0,0) at 16 share the window (8, 16]
        let w = windowed_matrix(&cos_x1(), 12.0, 4.0).unwrap();
        let i = w.modes.iter().position(|m| m.index == [3, 0, 0]).unwrap();
        let j = w.modes.iter().position(|m| m.index == [4, 0, 0]).unwrap();
        assert!((w.matrix.get(i, j) - 0.5).abs() < 1e-15);
        for d in 0..w.modes.len() {
            assert_eq!(w.matrix.get(d, d), 0.0);
        }
    }

    #[test]
    fn norm_examples() {
        let v = windowed_norm(&cos_x1(), 50.0, 5.0).unwrap();
        assert!(v > 0.0 && v <= 1.0, "{v}");
        let wider = windowed_norm(&cos_x1(), 50.0, 8.0).unwrap();
        assert!(wider >= v - 1e-12);
    }

    #[test]
    fn empty_window_errors() {
        // (110, 113) is a gap of the cube spectrum
        assert!(matches!(
            windowed_matrix(&cos_x1(), 111.5, 1.0),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(windowed_matrix(&cos_x1(), 10.0, 0.0).is_err());
    }

    #[test]
    fn scan_examples() {
        let reports = sap_scan(&cos_x1(), 5.0, 1.0, 200.0).unwrap();
        assert!(!reports.is_empty());
        for w in reports.windows(2) {
            assert!(w[0].eps_eff <= w[1].eps_eff);
        }
        assert!(sap_scan(&cos_x1(), 5.0, 10.0, 200.0).unwrap().is_empty());
        let c = Multiplier::from_terms(cube(), &[(&[0, 0, 0], 1.0)]).unwrap();
        assert!(sap_scan(&c, 5.0, 1.0, 100.0).unwrap().iter().all(|r| r.op_norm == 0.0));
    }

    #[test]
    fn scan_csv_header() {
        let reports = sap_scan(&cos_x1(), 5.0, 2.0, 60.0).unwrap();
        let mut buf = Vec::new();
        write_sap_csv(&reports, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("lambda,k,window_modes,op_norm,h2_norm,eps_eff,gap,rho_ok\n"));
    }

    #[test]
    fn periodic_entries_depend_on_difference() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Periodic).unwrap();
        let h = Multiplier::from_terms(d, &[(&[2], 1.0)]).unwrap();
        let w = windowed_matrix(&h, 5.0, 5.0).unwrap();
        // modes -3..=3 excluding 0: (0, 10]
        for (i, a) in w.modes.iter().enumerate() {
            for (j, b) in w.modes.iter().enumerate() {
                let expected = if (a.index[0] - b.index[0]).abs() == 2 { 0.5 } else { 0.0 };
                assert_eq!(w.matrix.get(i, j), expected);
            }
        }
    }
}
