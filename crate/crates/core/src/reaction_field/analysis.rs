use std::io::Write;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::PlanarField;
use super::surd::Surd;
use crate::error::{precondition, Error, Result};

pub const NEWTON_GRID: usize = 33;
pub const NEWTON_MAX_ITERS: usize = 50;
/// Default merge distance for fixed points found from different seeds.
pub const DEFAULT_DEDUP_TOL: f64 = 1e-8;
/// `delta_of` refuses points whose residual exceeds this.
pub const DELTA_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_LEMMA33_TOL: f64 = 1e-6;
/// Minimum separation for the four points of the hypothesis check.
pub const LEMMA33_DISTINCT: f64 = 1e-6;

/// Axis-aligned rectangle `[min, max]` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Region {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        let r = Self { min, max };
        r.validate()?;
        Ok(r)
    }

    /// `[-r, r]^2`.
    pub fn square(r: f64) -> Result<Self> {
        Self::new([-r, -r], [r, r])
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            if !(self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] < self.max[i]) {
                return Err(precondition(format!(
                    "region must satisfy min < max on every axis (axis {i}: {} .. {})",
                    self.min[i], self.max[i]
                )));
            }
        }
        Ok(())
    }

    fn contains(&self, p: [f64; 2], margin: f64) -> bool {
        (0..2).all(|i| p[i] >= self.min[i] - margin && p[i] <= self.max[i] + margin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactAnalysis {
    pub point: [Surd; 2],
    pub jacobian: [[Surd; 2]; 2],
    /// Present when the eigenvalue difference has an exact surd form.
    pub delta: Option<Surd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointAnalysis {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub point: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// Real pair sorted descending, or a conjugate pair with positive imaginary part first.
    pub eigenvalues: [Complex64; 2],
    /// `|Re(xi1 - xi2)|`; exactly 0 for conjugate pairs.
    pub delta: f64,
    /// Euclidean norm of the field at `point`.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactAnalysis>,
}

/// Eigenvalues of a real 2x2 matrix by the quadratic formula, and `delta`.
pub fn eigen2(j: [[f64; 2]; 2]) -> ([Complex64; 2], f64) {
    let mid = 0.5 * (j[0][0] + j[1][1]);
    let half = 0.5 * (j[0][0] - j[1][1]);
    let disc = half * half + j[0][1] * j[1][0];
    if disc >= 0.0 {
        let s = disc.sqrt();
        ([Complex64::new(mid + s, 0.0), Complex64::new(mid - s, 0.0)], 2.0 * s)
    } else {
        let s = (-disc).sqrt();
        ([Complex64::new(mid, s), Complex64::new(mid, -s)], 0.0)
    }
}

/// Exact `delta` when available: always for triangular Jacobians, and when the
/// discriminant is a non-negative rational otherwise.
fn exact_delta(j: &[[Surd; 2]; 2]) -> Option<Surd> {
    let diff = &j[0][0] - &j[1][1];
    let off = &j[0][1] * &j[1][0];
    if off.is_zero() {
        return Some(diff.abs());
    }
    // delta = 2 sqrt(disc) = sqrt(diff^2 + 4 off)
    let four = Surd::from_integer(4);
    let disc = &(&diff * &diff) + &(&four * &off);
    let r = disc.as_rational()?;
    if r.is_negative() {
        Some(Surd::zero())
    } else {
        Surd::sqrt_rational(&r)
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn analyze(
    field: &PlanarField,
    point: [f64; 2],
    exact_point: Option<[Surd; 2]>,
    label: Option<String>,
) -> FixedPointAnalysis {
    let jacobian = field.jacobian(point);
    let (eigenvalues, delta) = eigen2(jacobian);
    let exact = exact_point.and_then(|p| {
        let jac = field.exact_jacobian(&p)?;
        let delta = exact_delta(&jac);
        Some(ExactAnalysis {
            point: p,
            jacobian: jac,
            delta,
        })
    });
    FixedPointAnalysis {
        label,
        point,
        jacobian,
        eigenvalues,
        delta,
        residual: norm(field.eval(point)),
        exact,
    }
}

/// Analysis at a user-supplied point, which must be a fixed point to within
/// `DELTA_RESIDUAL_TOL`. Closed-form points of the named families are
/// recognized and analyzed exactly as well.
pub fn delta_of(field: &PlanarField, p: [f64; 2]) -> Result<FixedPointAnalysis> {
    field.validate()?;
    let residual = norm(field.eval(p));
    if !(residual <= DELTA_RESIDUAL_TOL) {
        return Err(Error::NotAFixedPoint {
            x: p[0],
            y: p[1],
            residual,
        });
    }
    let named = field
        .named_fixed_points()
        .into_iter()
        .find(|np| norm([np.point[0] - p[0], np.point[1] - p[1]]) <= 1e-12 * (1.0 + norm(p)));
    Ok(match named {
        Some(np) => analyze(field, p, np.exact, Some(np.label)),
        None => analyze(field, p, None, None),
    })
}

fn accepted_residual(residual: f64, p: [f64; 2]) -> bool {
    residual <= 1e-10 * (1.0 + norm(p).powi(3))
}

fn newton(field: &PlanarField, seed: [f64; 2]) -> Option<[f64; 2]> {
    let mut p = seed;
    for _ in 0..NEWTON_MAX_ITERS {
        let f = field.eval(p);
        let j = field.jacobian(p);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dy = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        p = [p[0] + dx, p[1] + dy];
        if !(p[0].is_finite() && p[1].is_finite()) {
            return None;
        }
        if norm([dx, dy]) < 1e-13 * (1.0 + norm(p)) {
            return Some(p);
        }
    }
    None
}

/// Fixed points: the closed-form points of the named families plus Newton
/// iterates from a uniform seed grid over `region`, merged at distance `tol`
/// and sorted lexicographically.
pub fn fixed_points(field: &PlanarField, region: &Region, tol: f64) -> Result<Vec<FixedPointAnalysis>> {
    field.validate()?;
    region.validate()?;
    if !(tol > 0.0) {
        return Err(precondition(format!("tol must be positive (got {tol})")));
    }

    let is_new = |found: &[FixedPointAnalysis], p: [f64; 2]| {
        found.iter().all(|a| norm([a.point[0] - p[0], a.point[1] - p[1]]) > tol)
    };
    let mut found: Vec<FixedPointAnalysis> = Vec::new();
    for np in field.named_fixed_points() {
        let a = analyze(field, np.point, np.exact, Some(np.label));
        if accepted_residual(a.residual, a.point) && is_new(&found, a.point) {
            found.push(a);
        }
    }

    let last = (NEWTON_GRID - 1) as f64;
    let seeds: Vec<[f64; 2]> = (0..NEWTON_GRID * NEWTON_GRID)
        .map(|s| {
            let (i, j) = ((s / NEWTON_GRID) as f64, (s % NEWTON_GRID) as f64);
            [
                region.min[0] + (region.max[0] - region.min[0]) * i / last,
                region.min[1] + (region.max[1] - region.min[1]) * j / last,
            ]
        })
        .collect();
    let roots: Vec<[f64; 2]> = seeds
        .par_iter()
        .filter_map(|&s| newton(field, s))
        .filter(|&p| region.contains(p, tol) && accepted_residual(norm(field.eval(p)), p))
        .collect();

    for p in roots {
        if is_new(&found, p) {
            found.push(analyze(field, p, None, None));
        }
    }
    found.sort_by(|a, b| {
        a.point[0]
            .total_cmp(&b.point[0])
            .then(a.point[1].total_cmp(&b.point[1]))
    });
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma33Match {
    pub index: usize,
    pub analysis: FixedPointAnalysis,
    /// `delta - index`.
    pub delta_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_delta_error: Option<Surd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma33Report {
    pub verdict: bool,
    pub tol: f64,
    pub matched: Vec<Lemma33Match>,
    pub fixed_points: Vec<FixedPointAnalysis>,
    pub conclusion: String,
}

const LEMMA33_CONCLUSION: &str = "four distinct fixed points with delta(p_i) = i: the two-component \
reaction-diffusion system on the Neumann pi-cube with this field has no normally hyperbolic \
inertial manifold (cited obstruction; hypotheses checked numerically, conclusion not re-proved)";

/// Searches `points` for four distinct ones with `|delta(p_i) - i| <= tol`.
pub fn lemma33_from_points(points: Vec<FixedPointAnalysis>, tol: f64) -> Lemma33Report {
    fn search(points: &[FixedPointAnalysis], tol: f64, chosen: &mut Vec<usize>) -> bool {
        let i = chosen.len();
        if i == 4 {
            return true;
        }
        for (idx, p) in points.iter().enumerate() {
            let distinct = chosen.iter().all(|&c| {
                let q = points[c].point;
                norm([q[0] - p.point[0], q[1] - p.point[1]]) >= LEMMA33_DISTINCT
            });
            if distinct && (p.delta - i as f64).abs() <= tol {
                chosen.push(idx);
                if search(points, tol, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::new();
    let verdict = search(&points, tol, &mut chosen);
    let matched = if verdict {
        chosen
            .iter()
            .enumerate()
            .map(|(i, &idx)| {
                let analysis = points[idx].clone();
                let target = Surd::from_rational(BigRational::from_integer((i as i64).into()));
                let exact_delta_error = analysis
                    .exact
                    .as_ref()
                    .and_then(|e| e.delta.as_ref())
                    .map(|d| d - &target);
                Lemma33Match {
                    index: i,
                    delta_error: analysis.delta - i as f64,
                    exact_delta_error,
                    analysis,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Lemma33Report {
        verdict,
        tol,
        matched,
        fixed_points: points,
        conclusion: if verdict {
            LEMMA33_CONCLUSION.to_string()
        } else {
            "no four distinct fixed points with delta(p_i) = i were found; no conclusion".to_string()
        },
    }
}

pub fn lemma33_check(field: &PlanarField, region: &Region, tol: f64) -> Result<Lemma33Report> {
    if !(tol > 0.0) {
        return Err(precondition(format!("tol must be positive (got {tol})")));
    }
    let points = fixed_points(field, region, DEFAULT_DEDUP_TOL)?;
    Ok(lemma33_from_points(points, tol))
}

/// Writes `i,px,py,xi1_re,xi1_im,xi2_re,xi2_im,delta`.
pub fn write_delta_csv<W: Write>(points: &[FixedPointAnalysis], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "px", "py", "xi1_re", "xi1_im", "xi2_re", "xi2_im", "delta"])?;
    for (i, p) in points.iter().enumerate() {
        let [x1, x2] = p.eigenvalues;
        w.write_record([
            i.to_string(),
            p.point[0].to_string(),
            p.point[1].to_string(),
            x1.re.to_string(),
            x1.im.to_string(),
            x2.re.to_string(),
            x2.im.to_string(),
            p.delta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::field::PolyTerm;
    use super::*;

    fn minus_identity() -> PlanarField {
        PlanarField::poly(vec![PolyTerm(1, 0, -1.0)], vec![PolyTerm(0, 1, -1.0)]).unwrap()
    }

    #[test]
    fn linear_field_has_one_point() {
        let pts = fixed_points(&minus_identity(), &Region::square(3.0).unwrap(), 1e-8).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(norm(pts[0].point) < 1e-12);
        let r = lemma33_check(&minus_identity(), &Region::square(3.0).unwrap(), 1e-6).unwrap();
        assert!(!r.verdict && r.matched.is_empty());
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let f = PlanarField::poly(vec![PolyTerm(0, 1, -1.0)], vec![PolyTerm(1, 0, 1.0)]).unwrap();
        let a = delta_of(&f, [0.0, 0.0]).unwrap();
        assert_eq!(a.delta, 0.0);
        assert_eq!(a.eigenvalues[0], Complex64::new(0.0, 1.0));
        assert_eq!(a.eigenvalues[1], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn delta_rejects_non_fixed_point() {
        let err = delta_of(&minus_identity(), [0.1, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotAFixedPoint { residual, .. } if (residual - 0.1).abs() < 1e-15));
    }

    #[test]
    fn coupled_origin_is_scalar() {
        let f = PlanarField::cubic_coupled(1.7, 8.0, 1.0).unwrap();
        let a = delta_of(&f, [0.0, 0.0]).unwrap();
        assert_eq!(a.jacobian, [[1.7, 0.0], [0.0, 1.7]]);
        assert_eq!(a.delta, 0.0);
        assert!(a.exact.is_none(), "k = 1.7 is not exact");
    }

    #[test]
    fn coupled_example_points_are_found() {
        let f = PlanarField::cubic_coupled(1.0, 8.0, 1.0).unwrap();
        let pts = fixed_points(&f, &Region::square(2.0).unwrap(), 1e-8).unwrap();
        for target in [
            [0.0, 0.0],
            [0.353_553_390_593_273_8, 0.0],
            [(2.0f64 / 9.0).sqrt(), (7.0f64 / 9.0).sqrt()],
            [0.0, 1.0],
        ] {
            assert!(
                pts.iter()
                    .any(|p| norm([p.point[0] - target[0], p.point[1] - target[1]]) < 1e-12),
                "{target:?}"
            );
        }
        for p in &pts {
            assert!(accepted_residual(p.residual, p.point));
        }
        // sorted, distinct
        for w in pts.windows(2) {
            assert!(w[0].point[0] <= w[1].point[0]);
            assert!(norm([w[0].point[0] - w[1].point[0], w[0].point[1] - w[1].point[1]]) > 1e-8);
        }
    }

    #[test]
    fn newton_finds_all_nine_uncoupled_points() {
        let f = PlanarField::cubic_uncoupled(2.0, 0.5, 3.0, 1.0).unwrap();
        // skip the closed forms by checking Newton alone
        let poly = PlanarField::poly(
            // x(2 - x)(x - 0.5) = -x^3 + 2.5x^2 - x
            vec![PolyTerm(3, 0, -1.0), PolyTerm(2, 0, 2.5), PolyTerm(1, 0, -1.0)],
            // y(3 - y)(y - 1) = -y^3 + 4y^2 - 3y
            vec![PolyTerm(0, 3, -1.0), PolyTerm(0, 2, 4.0), PolyTerm(0, 1, -3.0)],
        )
        .unwrap();
        let region = Region::square(4.0).unwrap();
        let a = fixed_points(&f, &region, 1e-8).unwrap();
        let b = fixed_points(&poly, &region, 1e-8).unwrap();
        assert_eq!(a.len(), 9);
        assert_eq!(b.len(), 9);
        for (p, q) in a.iter().zip(&b) {
            assert!(norm([p.point[0] - q.point[0], p.point[1] - q.point[1]]) < 1e-10);
            assert!((p.delta - q.delta).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_csv_header() {
        let pts = fixed_points(&minus_identity(), &Region::square(1.0).unwrap(), 1e-8).unwrap();
        let mut buf = Vec::new();
        write_delta_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,px,py,xi1_re,xi1_im,xi2_re,xi2_im,delta\n0,"));
    }
}
