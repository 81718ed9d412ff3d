use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::analysis::{delta_of, FixedPointAnalysis};
use super::field::{Param, PlanarField};
use super::surd::Surd;
use crate::error::{precondition, Error, Result};

pub const PROP34_BRACKET: (f64, f64) = (7.0, 20.0);
pub const DISSIPATIVITY_SAMPLES: usize = 10_000;
const BISECTION_MAX_ITERS: usize = 200;

/// `k(a) = a / (3a - 1)`, which makes `delta(p1) = 1`.
pub fn prop34_k(a: f64) -> f64 {
    a / (3.0 * a - 1.0)
}

/// `b(a) = a / (6a - 3)`, which makes `delta(p3) = 3`.
pub fn prop34_b(a: f64) -> f64 {
    a / (6.0 * a - 3.0)
}

/// `delta(p2)` along the one-parameter family: `2k |a - b - 2| / (ab + 1)`.
pub fn prop34_phi(a: f64) -> f64 {
    let (k, b) = (prop34_k(a), prop34_b(a));
    2.0 * k * (a - b - 2.0).abs() / (a * b + 1.0)
}

/// The coupled cubic field at `a` with `k(a)` and `b(a)`.
pub fn prop34_field(a: f64) -> Result<PlanarField> {
    PlanarField::cubic_coupled(Param::float(prop34_k(a)), Param::float(a), Param::float(prop34_b(a)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop34Checklist {
    pub delta0_is_0: bool,
    pub delta1_is_1: bool,
    pub delta2_is_2: bool,
    pub delta3_is_3: bool,
    /// `a >= 1 + 1/b >= b`.
    pub ordering: bool,
    /// `r0^2 = 2/b < 12`.
    pub r0sq_lt_12: bool,
    /// Every `p_i` lies in `[0, 1] x [0, sqrt 6]`.
    pub points_in_dc: bool,
    pub points_norm_le_sqrt7: bool,
    /// `1/b <= 6 <= a - 1`, so the rectangle is positively invariant.
    pub region_invariant: bool,
}

impl Prop34Checklist {
    pub fn all_pass(&self) -> bool {
        [
            self.delta0_is_0,
            self.delta1_is_1,
            self.delta2_is_2,
            self.delta3_is_3,
            self.ordering,
            self.r0sq_lt_12,
            self.points_in_dc,
            self.points_norm_le_sqrt7,
            self.region_invariant,
        ]
        .iter()
        .all(|&b| b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop34Constants {
    pub a_star: f64,
    pub k: f64,
    pub b: f64,
    pub phi_residual: f64,
    pub r0_sq: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub points: Vec<FixedPointAnalysis>,
    pub checklist: Prop34Checklist,
}

pub fn solve_prop34(tol: f64) -> Result<Prop34Constants> {
    solve_prop34_in(tol, PROP34_BRACKET)
}

/// Bisection for `phi(a) = 2` on `bracket`, then the full checklist at the root.
pub fn solve_prop34_in(tol: f64, bracket: (f64, f64)) -> Result<Prop34Constants> {
    if !(tol > 0.0) {
        return Err(precondition(format!("tol must be positive (got {tol})")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 1.0 && hi > lo && hi.is_finite()) {
        return Err(precondition(format!(
            "bracket must satisfy 1 < lo < hi (got [{lo}, {hi}])"
        )));
    }
    let g = |a: f64| prop34_phi(a) - 2.0;
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo * g_hi < 0.0) {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo: g_lo,
            f_hi: g_hi,
        });
    }

    let mut root = None;
    for it in 1..=BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid.abs() <= tol {
            root = Some((mid, it));
            break;
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let (a, iterations) =
        root.ok_or_else(|| Error::Numerical(format!("bisection interval collapsed before |phi - 2| <= {tol}")))?;

    let (k, b) = (prop34_k(a), prop34_b(a));
    let field = prop34_field(a)?;
    let points = field
        .named_fixed_points()
        .into_iter()
        .map(|np| delta_of(&field, np.point))
        .collect::<Result<Vec<_>>>()?;
    if points.len() != 4 {
        return Err(Error::Consistency(format!(
            "expected four closed-form points, got {}",
            points.len()
        )));
    }

    let check = 1e-9 + tol;
    let delta_is = |i: usize| (points[i].delta - i as f64).abs() <= check;
    let sqrt6 = 6f64.sqrt();
    let slack = 1e-12;
    let r0_sq = 2.0 / a.min(b);
    let checklist = Prop34Checklist {
        delta0_is_0: delta_is(0),
        delta1_is_1: delta_is(1),
        delta2_is_2: delta_is(2),
        delta3_is_3: delta_is(3),
        ordering: a >= 1.0 + 1.0 / b && 1.0 + 1.0 / b >= b,
        r0sq_lt_12: r0_sq < 12.0,
        points_in_dc: points.iter().all(|p| {
            let [x, y] = p.point;
            (-slack..=1.0 + slack).contains(&x) && (-slack..=sqrt6 + slack).contains(&y)
        }),
        points_norm_le_sqrt7: points.iter().all(|p| p.point[0].hypot(p.point[1]) <= 7f64.sqrt()),
        region_invariant: invariant_region_check(&field, &Param::exact(Surd::sqrt_of_integer(6).expect("small")))?
            .holds,
    };

    Ok(Prop34Constants {
        a_star: a,
        k,
        b,
        phi_residual: g(a).abs(),
        r0_sq,
        bracket,
        iterations,
        points,
        checklist,
    })
}

/// The uncoupled field with `(a, b, c, d) = (2, sqrt 3, sqrt 6, sqrt 2)`, exact.
pub fn prop35_field() -> PlanarField {
    let s = |n: u64| Param::exact(Surd::sqrt_of_integer(n).expect("small"));
    PlanarField::cubic_uncoupled(Param::exact(Surd::from_integer(2)), s(3), s(6), s(2)).expect("positive constants")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop35Report {
    pub points: Vec<FixedPointAnalysis>,
    /// Closed-form diagonals `(-ab, -cd), (b(a-b), d(c-d)), (a(b-a), c(d-c)), (b(a-b), c(d-c))`.
    pub expected_diagonals: Vec<[f64; 2]>,
    pub jacobians_match: bool,
    pub delta_errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_delta_errors: Option<Vec<Surd>>,
    pub verdict: bool,
}

/// Checks the four distinguished points of an uncoupled cubic field against
/// the closed-form diagonal Jacobians and `delta(p_i) = i`. Exact whenever the
/// parameters are exact.
pub fn verify_prop35(field: &PlanarField) -> Result<Prop35Report> {
    let PlanarField::CubicUncoupled { a, b, c, d } = field else {
        return Err(precondition("verification applies to the uncoupled cubic family"));
    };
    field.validate()?;
    let named = field.named_fixed_points();
    let points = named[..4]
        .iter()
        .map(|np| delta_of(field, np.point))
        .collect::<Result<Vec<_>>>()?;

    let (af, bf, cf, df) = (a.value(), b.value(), c.value(), d.value());
    let expected_diagonals = vec![
        [-af * bf, -cf * df],
        [bf * (af - bf), df * (cf - df)],
        [af * (bf - af), cf * (df - cf)],
        [bf * (af - bf), cf * (df - cf)],
    ];
    let delta_errors: Vec<f64> = points.iter().enumerate().map(|(i, p)| p.delta - i as f64).collect();

    let exact_params = [a, b, c, d].map(|p| p.exact_value().cloned());
    let exact = if let [Some(a), Some(b), Some(c), Some(d)] = exact_params {
        let diag = [
            [-&(&a * &b), -&(&c * &d)],
            [&b * &(&a - &b), &d * &(&c - &d)],
            [&a * &(&b - &a), &c * &(&d - &c)],
            [&b * &(&a - &b), &c * &(&d - &c)],
        ];
        let mut matches = true;
        let mut errors = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let e = p
                .exact
                .as_ref()
                .ok_or_else(|| Error::Consistency("exact analysis missing".into()))?;
            let j = &e.jacobian;
            matches &= j[0][0] == diag[i][0] && j[1][1] == diag[i][1] && j[0][1].is_zero() && j[1][0].is_zero();
            let delta = e
                .delta
                .as_ref()
                .ok_or_else(|| Error::Consistency("exact delta missing".into()))?;
            errors.push(delta - &Surd::from_rational(BigRational::from_integer((i as i64).into())));
        }
        Some((matches, errors))
    } else {
        None
    };

    let (jacobians_match, verdict, exact_delta_errors) = match exact {
        Some((m, errors)) => {
            let ok = m && errors.iter().all(Surd::is_zero);
            (m, ok, Some(errors))
        }
        None => {
            let m = points.iter().zip(&expected_diagonals).all(|(p, e)| {
                let j = p.jacobian;
                (j[0][0] - e[0]).abs() <= 1e-12 && (j[1][1] - e[1]).abs() <= 1e-12 && j[0][1] == 0.0 && j[1][0] == 0.0
            });
            (m, m && delta_errors.iter().all(|e| e.abs() <= 1e-12), None)
        }
    };

    Ok(Prop35Report {
        points,
        expected_diagonals,
        jacobians_match,
        delta_errors,
        exact_delta_errors,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipativityReport {
    /// Radius beyond which `v . f(v) <= 0`; for the uncoupled family, the norm
    /// of the component radii.
    pub r0: f64,
    pub r0_sq: f64,
    /// Per-component sign radii (uncoupled family only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_radii: Option<[f64; 2]>,
    pub samples: usize,
    pub seed: u64,
    /// Largest sampled value of the sign functional, never positive when verified.
    pub max_sampled_value: f64,
    pub verified: bool,
}

/// Closed-form sign radius plus a seeded sampling check of `v . f(v) <= 0`
/// on the annulus `r0 <= |v| <= 2 r0` (componentwise for the uncoupled family).
pub fn dissipativity_radius(field: &PlanarField, seed: u64) -> Result<DissipativityReport> {
    field.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_value = f64::NEG_INFINITY;
    let (r0, component_radii) = match field {
        PlanarField::CubicCoupled { k, a, b } => {
            let r0 = (2.0 / a.value().min(b.value())).sqrt();
            for _ in 0..DISSIPATIVITY_SAMPLES {
                let r = rng.gen_range(r0..=2.0 * r0);
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let v = [r * t.cos(), r * t.sin()];
                let f = field.eval(v);
                let value = v[0] * f[0] + v[1] * f[1];
                // The functional vanishes on the inner circle when a = b.
                let scale = 1e-12 * k.value() * (1.0 + r.powi(4) * a.value().max(b.value()));
                if value > scale {
                    return Err(Error::SignViolation {
                        x: v[0],
                        y: v[1],
                        value,
                    });
                }
                max_value = max_value.max(value);
            }
            (r0, None)
        }
        PlanarField::CubicUncoupled { a, b, c, d } => {
            let radii = [a.value().max(b.value()), c.value().max(d.value())];
            for _ in 0..DISSIPATIVITY_SAMPLES {
                for (axis, &rad) in radii.iter().enumerate() {
                    let mag = rng.gen_range(rad..=2.0 * rad);
                    let t = if rng.gen_bool(0.5) { mag } else { -mag };
                    let v = if axis == 0 { [t, 0.0] } else { [0.0, t] };
                    let value = t * field.eval(v)[axis];
                    if value > 1e-12 * (1.0 + t.powi(4)) {
                        return Err(Error::SignViolation {
                            x: v[0],
                            y: v[1],
                            value,
                        });
                    }
                    max_value = max_value.max(value);
                }
            }
            (radii[0].hypot(radii[1]), Some(radii))
        }
        PlanarField::Poly { .. } => {
            return Err(precondition("dissipativity radius applies to the cubic families only"));
        }
    };
    Ok(DissipativityReport {
        r0,
        r0_sq: r0 * r0,
        component_radii,
        samples: DISSIPATIVITY_SAMPLES,
        seed,
        max_sampled_value: max_value,
        verified: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCheck {
    /// `1/b <= c^2 <= a - 1`.
    pub holds: bool,
    /// Whether the comparison was carried out in rational arithmetic.
    pub exact: bool,
    pub b_inv: f64,
    pub c_sq: f64,
    pub a_minus_1: f64,
}

/// Positive invariance of `[0, 1] x [0, c]` for the coupled cubic field.
pub fn invariant_region_check(field: &PlanarField, c: &Param) -> Result<RegionCheck> {
    let PlanarField::CubicCoupled { a, b, .. } = field else {
        return Err(precondition(
            "invariant region check applies to the coupled cubic family",
        ));
    };
    if !(c.value() > 0.0 && c.value().is_finite()) {
        return Err(precondition(format!("c must be positive (got {c})")));
    }
    let b_inv = 1.0 / b.value();
    let c_sq = c.value() * c.value();
    let a_minus_1 = a.value() - 1.0;

    let rational = |p: &Param| p.exact_value().and_then(Surd::as_rational);
    let c_sq_exact = c.exact_value().map(|c| c * c).and_then(|s| s.as_rational());
    let (holds, exact) = match (rational(a), rational(b), c_sq_exact) {
        (Some(a), Some(b), Some(c2)) => {
            let one = BigRational::from_integer(1.into());
            (b.recip() <= c2 && c2 <= a - one, true)
        }
        _ => (b_inv <= c_sq && c_sq <= a_minus_1, false),
    };
    Ok(RegionCheck {
        holds,
        exact,
        b_inv,
        c_sq,
        a_minus_1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert!((prop34_phi(7.0) - 1.495_454_545_454_545_5).abs() < 1e-12);
        assert!(prop34_phi(10.0) < 2.0 && prop34_phi(10.5) > 2.0);
        assert!((prop34_phi(1e6) - 4.0).abs() < 0.01);
    }

    #[test]
    fn family_normalizes_outer_deltas() {
        for a in [2.0, 7.0, 10.3, 55.0] {
            let (k, b) = (prop34_k(a), prop34_b(a));
            assert!((k * (3.0 - 1.0 / a) - 1.0).abs() < 1e-14);
            assert!((k * (3.0 + 1.0 / b) - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn bad_bracket() {
        assert!(matches!(
            solve_prop34_in(1e-10, (11.0, 20.0)),
            Err(Error::Bracket { .. })
        ));
        assert!(solve_prop34_in(0.0, PROP34_BRACKET).is_err());
    }

    #[test]
    fn solved_constants() {
        let c = solve_prop34(1e-10).unwrap();
        assert!(c.a_star > 10.0 && c.a_star < 10.5);
        assert!(c.phi_residual <= 1e-10);
        assert!(c.checklist.all_pass(), "{:?}", c.checklist);
        assert!((c.r0_sq - (12.0 - 6.0 / c.a_star)).abs() < 1e-12);
    }

    #[test]
    fn region_examples() {
        let f = PlanarField::cubic_coupled(1.0, 2.0, 1.0).unwrap();
        let r = invariant_region_check(&f, &Param::from(1.0)).unwrap();
        assert!(r.holds && r.exact);
        let g = PlanarField::cubic_coupled(1.0, 2.0, 0.1).unwrap();
        assert!(!invariant_region_check(&g, &Param::from(1.0)).unwrap().holds);
        assert!(invariant_region_check(&prop35_field(), &Param::from(1.0)).is_err());
    }

    #[test]
    fn dissipativity_examples() {
        let f = PlanarField::cubic_coupled(1.0, 1.0, 1.0).unwrap();
        let r = dissipativity_radius(&f, 7).unwrap();
        assert!((r.r0_sq - 2.0).abs() < 1e-15 && r.verified);
        let u = dissipativity_radius(&prop35_field(), 7).unwrap();
        assert_eq!(u.component_radii, Some([2.0, 6f64.sqrt()]));
        assert!(u.max_sampled_value <= 0.0);
    }

    #[test]
    fn prop35_exact_table() {
        let r = verify_prop35(&prop35_field()).unwrap();
        assert!(r.verdict && r.jacobians_match);
        assert!(r.exact_delta_errors.unwrap().iter().all(Surd::is_zero));
        let float = PlanarField::cubic_uncoupled(2.0, 3f64.sqrt(), 6f64.sqrt(), 2f64.sqrt()).unwrap();
        let rf = verify_prop35(&float).unwrap();
        assert!(rf.verdict && rf.exact_delta_errors.is_none());
        assert!(rf.delta_errors.iter().all(|e| e.abs() <= 1e-12));
    }
}
