use serde::{Deserialize, Serialize};

use super::spectrum::{Spectrum, MERGE_RTOL};
use crate::error::{precondition, Result};

/// Gap statistics of a spectrum up to its cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub max_gap: f64,
    /// First consecutive pair `(lambda_n, lambda_{n+1})` attaining `max_gap`.
    pub witness: (f64, f64),
    /// `(gap value, number of occurrences)`, ascending in the gap value.
    pub histogram: Vec<(f64, u64)>,
    /// `(checkpoint, largest gap with upper end <= checkpoint)` at checkpoints
    /// `1, 2, 4, ...` and the cutoff itself.
    pub sup_trend: Vec<(f64, f64)>,
}

impl GapReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn gap_stats(spectrum: &Spectrum) -> Result<GapReport> {
    let entries = spectrum.entries();
    if entries.len() < 2 {
        return Err(precondition("gap statistics need at least two distinct eigenvalues"));
    }
    let gaps: Vec<(f64, f64, f64)> = entries
        .windows(2)
        .map(|w| (w[1].value - w[0].value, w[0].value, w[1].value))
        .collect();

    let mut best = gaps[0];
    for &g in &gaps[1..] {
        if g.0 > best.0 {
            best = g;
        }
    }

    let mut sorted: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    sorted.sort_by(f64::total_cmp);
    let mut histogram: Vec<(f64, u64)> = Vec::new();
    for g in sorted {
        match histogram.last_mut() {
            Some((v, c)) if g - *v <= MERGE_RTOL * (1.0 + v.abs()) => *c += 1,
            _ => histogram.push((g, 1)),
        }
    }

    let sup_trend = running_max_trend(gaps.iter().map(|&(g, _, hi)| (hi, g)), spectrum.cutoff());

    Ok(GapReport {
        max_gap: best.0,
        witness: (best.1, best.2),
        histogram,
        sup_trend,
    })
}

/// Running maximum of `(position, value)` pairs (positions ascending) sampled at
/// checkpoints `1, 2, 4, ...` below `cutoff` and at `cutoff`.
pub(crate) fn running_max_trend(points: impl Iterator<Item = (f64, f64)>, cutoff: f64) -> Vec<(f64, f64)> {
    let mut checkpoints = Vec::new();
    let mut c = 1.0;
    while c < cutoff {
        checkpoints.push(c);
        c *= 2.0;
    }
    checkpoints.push(cutoff);

    let mut out = Vec::with_capacity(checkpoints.len());
    let mut running: Option<f64> = None;
    let mut points = points.peekable();
    for cp in checkpoints {
        while let Some(&(pos, v)) = points.peek() {
            if pos > cp {
                break;
            }
            running = Some(running.map_or(v, |r: f64| r.max(v)));
            points.next();
        }
        if let Some(r) = running {
            out.push((cp, r));
        }
    }
    out
}

/// Parameters of the jump condition `mu_{n+1} - mu_n > c*L*(mu_{n+1}^theta + mu_n^theta)`
/// for the shifted spectrum `mu_n = 1 + nu*lambda_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpQuery {
    pub theta: f64,
    pub lip: f64,
    pub cconst: f64,
    pub nu: f64,
}

impl JumpQuery {
    pub fn new(theta: f64, lip: f64, cconst: f64, nu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(precondition(format!("theta must lie in [0, 1) (got {theta})")));
        }
        for (name, v) in [("lip", lip), ("cconst", cconst), ("nu", nu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(precondition(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(Self { theta, lip, cconst, nu })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    /// Index (into the distinct entries) of the lower eigenvalue of the best pair.
    pub best_n: usize,
    pub best_ratio: f64,
    /// `c * L`, the level the ratio has to exceed.
    pub threshold: f64,
    pub satisfied: bool,
    /// Running maximum of the ratio, sampled like [`GapReport::sup_trend`].
    pub ratio_trend: Vec<(f64, f64)>,
}

pub fn jump_condition_scan(spectrum: &Spectrum, query: &JumpQuery) -> Result<JumpReport> {
    let entries = spectrum.entries();
    if entries.len() < 2 {
        return Err(precondition("jump scan needs at least two distinct eigenvalues"));
    }
    let mu = |lambda: f64| 1.0 + query.nu * lambda;
    let ratios: Vec<(f64, f64)> = entries
        .windows(2)
        .map(|w| {
            let (lo, hi) = (mu(w[0].value), mu(w[1].value));
            (w[1].value, (hi - lo) / (hi.powf(query.theta) + lo.powf(query.theta)))
        })
        .collect();

    let (mut best_n, mut best_ratio) = (0, ratios[0].1);
    for (n, &(_, r)) in ratios.iter().enumerate().skip(1) {
        if r > best_ratio {
            best_n = n;
            best_ratio = r;
        }
    }
    let threshold = query.cconst * query.lip;
    Ok(JumpReport {
        best_n,
        best_ratio,
        threshold,
        satisfied: best_ratio > threshold,
        ratio_trend: running_max_trend(ratios.into_iter(), spectrum.cutoff()),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{enumerate_spectrum, BoundaryCondition, BoxDomain, SpectralEntry};
    use super::*;

    #[test]
    fn single_gap() {
        let s = Spectrum::new(
            vec![
                SpectralEntry {
                    value: 0.0,
                    multiplicity: 1,
                },
                SpectralEntry {
                    value: 5.0,
                    multiplicity: 2,
                },
            ],
            5.0,
        )
        .unwrap();
        let r = gap_stats(&s).unwrap();
        assert_eq!(r.max_gap, 5.0);
        assert_eq!(r.witness, (0.0, 5.0));
        assert_eq!(r.histogram, vec![(5.0, 1)]);
    }

    #[test]
    fn dirichlet_interval_gaps_grow() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Dirichlet).unwrap();
        let s = enumerate_spectrum(&d, 1001.0 * 1001.0).unwrap();
        assert_eq!(s.len(), 1001);
        let r = gap_stats(&s).unwrap();
        assert_eq!(r.max_gap, 2001.0);
        assert_eq!(r.witness, (1_000_000.0, 1_002_001.0));
        assert_eq!(r.histogram.len(), 1000);
        let trend: Vec<f64> = r.sup_trend.iter().map(|t| t.1).collect();
        assert!(trend.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn too_short_spectrum() {
        let s = Spectrum::new(
            vec![SpectralEntry {
                value: 1.0,
                multiplicity: 1,
            }],
            1.0,
        )
        .unwrap();
        assert!(gap_stats(&s).is_err());
    }

    #[test]
    fn gap_report_json_shape() {
        let d = BoxDomain::pi_cube(3, BoundaryCondition::Neumann).unwrap();
        let r = gap_stats(&enumerate_spectrum(&d, 20.0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["max_gap"], 2.0);
        assert_eq!(v["witness"], serde_json::json!([6.0, 8.0]));
        assert!(v["histogram"].is_array());
        assert!(v["sup_trend"].is_array());
    }

    #[test]
    fn jump_query_validation() {
        assert!(JumpQuery::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(JumpQuery::new(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(JumpQuery::new(0.5, 1.0, 1.0, -1.0).is_err());
        assert!(JumpQuery::new(0.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn jump_on_dirichlet_interval() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Dirichlet).unwrap();
        let s = enumerate_spectrum(&d, 200.0).unwrap();
        let r = jump_condition_scan(&s, &JumpQuery::new(0.0, 10.0, 1.0, 1.0).unwrap()).unwrap();
        // Largest computed gap is 169 -> 196, between entries 12 and 13.
        assert_eq!(r.best_n, 12);
        assert_eq!(r.best_ratio, 27.0 / 2.0);
        assert!(r.satisfied);
    }

    #[test]
    fn jump_ratio_saturates_for_half_exponent() {
        let d = BoxDomain::pi_cube(1, BoundaryCondition::Dirichlet).unwrap();
        let s = enumerate_spectrum(&d, 1e6).unwrap();
        let r = jump_condition_scan(&s, &JumpQuery::new(0.5, 1.0, 1.0, 1.0).unwrap()).unwrap();
        // (2n+1) / (sqrt(1+(n+1)^2) + sqrt(1+n^2)) stays below 1 and tends to it.
        assert!(r.best_ratio < 1.0 && r.best_ratio > 0.999, "{}", r.best_ratio);
        let last = r.ratio_trend.last().unwrap().1;
        let mid = r.ratio_trend[r.ratio_trend.len() / 2].1;
        assert!(last >= mid && last - mid < 1e-3);
    }
}
