use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::surd::Surd;
use crate::error::{precondition, Error, Result};

/// Largest total degree accepted for coefficient-table fields.
pub const MAX_POLY_DEGREE: u32 = 5;

/// A real parameter, optionally carried exactly as a surd.
///
/// Deserializes from a JSON number (exact when integer-valued) or from a
/// string such as `"sqrt(3)"`, `"-3/4"` or `"2*sqrt(2/3)"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    value: f64,
    exact: Option<Surd>,
}

impl Param {
    pub fn float(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn exact(s: Surd) -> Self {
        Self {
            value: s.to_f64(),
            exact: Some(s),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact_value(&self) -> Option<&Surd> {
        self.exact.as_ref()
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
            Self::exact(Surd::from_integer(v as i64))
        } else {
            Self::float(v)
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(surd) = s.parse::<Surd>() {
            return Ok(Self::exact(surd));
        }
        s.trim()
            .parse::<f64>()
            .map(Self::from)
            .map_err(|_| precondition(format!("cannot parse parameter `{s}`")))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let integer = self
            .exact
            .as_ref()
            .and_then(Surd::as_rational)
            .filter(BigRational::is_integer);
        match (&self.exact, integer) {
            (Some(_), Some(_)) | (None, _) => s.serialize_f64(self.value),
            (Some(e), None) => e.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Param::from(v)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `coef * v1^i * v2^j`, serialized as `[i, j, coef]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm(pub u32, pub u32, pub f64);

/// A polynomial vector field on the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanarField {
    /// `f1 = k v1 (1 - a v1^2 + v2^2)`, `f2 = k v2 (1 - b v2^2 - v1^2)`.
    CubicCoupled { k: Param, a: Param, b: Param },
    /// `f1 = v1 (a - v1)(v1 - b)`, `f2 = v2 (c - v2)(v2 - d)`.
    CubicUncoupled { a: Param, b: Param, c: Param, d: Param },
    /// Coefficient tables for each component.
    Poly { f1: Vec<PolyTerm>, f2: Vec<PolyTerm> },
}

/// A fixed point known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPoint {
    pub label: String,
    pub point: [f64; 2],
    pub exact: Option<[Surd; 2]>,
}

impl PlanarField {
    pub fn cubic_coupled(k: impl Into<Param>, a: impl Into<Param>, b: impl Into<Param>) -> Result<Self> {
        let f = Self::CubicCoupled {
            k: k.into(),
            a: a.into(),
            b: b.into(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn cubic_uncoupled(
        a: impl Into<Param>,
        b: impl Into<Param>,
        c: impl Into<Param>,
        d: impl Into<Param>,
    ) -> Result<Self> {
        let f = Self::CubicUncoupled {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn poly(f1: Vec<PolyTerm>, f2: Vec<PolyTerm>) -> Result<Self> {
        let f = Self::Poly { f1, f2 };
        f.validate()?;
        Ok(f)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, p: &Param| {
            if p.value().is_finite() && p.value() > 0.0 {
                Ok(())
            } else {
                Err(precondition(format!(
                    "parameter {name} must be positive and finite (got {p})"
                )))
            }
        };
        match self {
            Self::CubicCoupled { k, a, b } => {
                positive("k", k)?;
                positive("a", a)?;
                positive("b", b)
            }
            Self::CubicUncoupled { a, b, c, d } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("c", c)?;
                positive("d", d)
            }
            Self::Poly { f1, f2 } => {
                for (name, terms) in [("f1", f1), ("f2", f2)] {
                    for t in terms {
                        if t.0 + t.1 > MAX_POLY_DEGREE {
                            return Err(precondition(format!(
                                "{name}: term v1^{} v2^{} exceeds total degree {MAX_POLY_DEGREE}",
                                t.0, t.1
                            )));
                        }
                        if !t.2.is_finite() {
                            return Err(precondition(format!("{name}: non-finite coefficient")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, v: [f64; 2]) -> [f64; 2] {
        let [x, y] = v;
        match self {
            Self::CubicCoupled { k, a, b } => {
                let (k, a, b) = (k.value(), a.value(), b.value());
                [k * x * (1.0 - a * x * x + y * y), k * y * (1.0 - b * y * y - x * x)]
            }
            Self::CubicUncoupled { a, b, c, d } => [
                x * (a.value() - x) * (x - b.value()),
                y * (c.value() - y) * (y - d.value()),
            ],
            Self::Poly { f1, f2 } => [eval_poly(f1, x, y), eval_poly(f2, x, y)],
        }
    }

    pub fn jacobian(&self, v: [f64; 2]) -> [[f64; 2]; 2] {
        let [x, y] = v;
        match self {
            Self::CubicCoupled { k, a, b } => {
                let (k, a, b) = (k.value(), a.value(), b.value());
                [
                    [k * (1.0 - 3.0 * a * x * x + y * y), k * 2.0 * x * y],
                    [-k * 2.0 * x * y, k * (1.0 - x * x - 3.0 * b * y * y)],
                ]
            }
            Self::CubicUncoupled { a, b, c, d } => [
                [cubic_slope(a.value(), b.value(), x), 0.0],
                [0.0, cubic_slope(c.value(), d.value(), y)],
            ],
            Self::Poly { f1, f2 } => [
                [d_poly(f1, x, y, 0), d_poly(f1, x, y, 1)],
                [d_poly(f2, x, y, 0), d_poly(f2, x, y, 1)],
            ],
        }
    }

    /// Jacobian in exact arithmetic, when every parameter is exact.
    pub fn exact_jacobian(&self, v: &[Surd; 2]) -> Option<[[Surd; 2]; 2]> {
        let [x, y] = v;
        let n = Surd::from_integer;
        match self {
            Self::CubicCoupled { k, a, b } => {
                let (k, a, b) = (k.exact_value()?, a.exact_value()?, b.exact_value()?);
                let xx = x * x;
                let yy = y * y;
                let xy2 = &(x * y) * &n(2);
                let j00 = &(&n(1) - &(&(&n(3) * a) * &xx)) + &yy;
                let j11 = &(&n(1) - &xx) - &(&(&n(3) * b) * &yy);
                Some([[k * &j00, k * &xy2], [-&(k * &xy2), k * &j11]])
            }
            Self::CubicUncoupled { a, b, c, d } => {
                let slope = |p: &Surd, q: &Surd, t: &Surd| {
                    // -3t^2 + 2(p + q)t - pq
                    let quad = &(&n(-3) * &(t * t)) + &(&(&n(2) * &(p + q)) * t);
                    &quad - &(p * q)
                };
                let (a, b, c, d) = (a.exact_value()?, b.exact_value()?, c.exact_value()?, d.exact_value()?);
                Some([[slope(a, b, x), Surd::zero()], [Surd::zero(), slope(c, d, y)]])
            }
            Self::Poly { .. } => None,
        }
    }

    /// Fixed points available in closed form for the named families.
    pub fn named_fixed_points(&self) -> Vec<NamedPoint> {
        match self {
            Self::CubicCoupled { a, b, .. } => coupled_points(a, b),
            Self::CubicUncoupled { a, b, c, d } => uncoupled_points([a, b], [c, d]),
            Self::Poly { .. } => Vec::new(),
        }
    }
}

fn eval_poly(terms: &[PolyTerm], x: f64, y: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.2 * x.powi(t.0 as i32) * y.powi(t.1 as i32))
        .sum()
}

fn d_poly(terms: &[PolyTerm], x: f64, y: f64, axis: usize) -> f64 {
    terms
        .iter()
        .map(|&PolyTerm(i, j, c)| match axis {
            0 if i > 0 => c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32),
            1 if j > 0 => c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1),
            _ => 0.0,
        })
        .sum()
}

/// Derivative of `t (p - t)(t - q)`.
fn cubic_slope(p: f64, q: f64, t: f64) -> f64 {
    -3.0 * t * t + 2.0 * (p + q) * t - p * q
}

fn coupled_points(a: &Param, b: &Param) -> Vec<NamedPoint> {
    let (af, bf) = (a.value(), b.value());
    let ra = a.exact_value().and_then(Surd::as_rational);
    let rb = b.exact_value().and_then(Surd::as_rational);
    let sqrt_r = |r: Option<BigRational>| r.and_then(|r| Surd::sqrt_rational(&r));

    let mut out = vec![
        NamedPoint {
            label: "p0".into(),
            point: [0.0, 0.0],
            exact: Some([Surd::zero(), Surd::zero()]),
        },
        NamedPoint {
            label: "p1".into(),
            point: [1.0 / af.sqrt(), 0.0],
            exact: sqrt_r(ra.clone().map(|a| a.recip())).map(|x| [x, Surd::zero()]),
        },
    ];
    if af > 1.0 {
        let den = af * bf + 1.0;
        let exact = match (&ra, &rb) {
            (Some(a), Some(b)) => {
                let one = BigRational::from_integer(1.into());
                let den = a * b + &one;
                let x = Surd::sqrt_rational(&((b + &one) / &den));
                let y = Surd::sqrt_rational(&((a - &one) / &den));
                x.zip(y).map(|(x, y)| [x, y])
            }
            _ => None,
        };
        out.push(NamedPoint {
            label: "p2".into(),
            point: [((bf + 1.0) / den).sqrt(), ((af - 1.0) / den).sqrt()],
            exact,
        });
    }
    out.push(NamedPoint {
        label: "p3".into(),
        point: [0.0, 1.0 / bf.sqrt()],
        exact: sqrt_r(rb.map(|b| b.recip())).map(|y| [Surd::zero(), y]),
    });
    out
}

/// The nine points with components in `{0, a, b} x {0, c, d}`, the four
/// distinguished ones first.
fn uncoupled_points(first: [&Param; 2], second: [&Param; 2]) -> Vec<NamedPoint> {
    let zero = Param::exact(Surd::zero());
    let xs = [&zero, first[0], first[1]];
    let ys = [&zero, second[0], second[1]];
    let order = [(0, 0, "p0"), (2, 2, "p1"), (1, 1, "p2"), (2, 1, "p3")];
    let mut pairs: Vec<(usize, usize, String)> = order.iter().map(|&(i, j, l)| (i, j, l.to_string())).collect();
    for i in 0..3 {
        for j in 0..3 {
            if !order.iter().any(|&(oi, oj, _)| (oi, oj) == (i, j)) {
                pairs.push((i, j, format!("q{i}{j}")));
            }
        }
    }
    pairs
        .into_iter()
        .map(|(i, j, label)| NamedPoint {
            label,
            point: [xs[i].value(), ys[j].value()],
            exact: xs[i]
                .exact_value()
                .cloned()
                .zip(ys[j].exact_value().cloned())
                .map(|(x, y)| [x, y]),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Param {
        s.parse().unwrap()
    }

    #[test]
    fn formulas_match_definitions() {
        let f = PlanarField::cubic_coupled(2.0, 3.0, 0.5).unwrap();
        let [f1, f2] = f.eval([0.3, -0.7]);
        assert!((f1 - 2.0 * 0.3 * (1.0 - 3.0 * 0.09 + 0.49)).abs() < 1e-15);
        assert!((f2 - 2.0 * -0.7 * (1.0 - 0.5 * 0.49 - 0.09)).abs() < 1e-15);

        let g = PlanarField::cubic_uncoupled(2.0, 1.0, 3.0, 0.5).unwrap();
        let [g1, g2] = g.eval([1.5, 2.0]);
        assert!((g1 - 1.5 * 0.5 * 0.5).abs() < 1e-15);
        assert!((g2 - 2.0 * 1.0 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let fields = [
            PlanarField::cubic_coupled(1.5, 8.0, 1.0).unwrap(),
            PlanarField::cubic_uncoupled(2.0, 1.2, 3.0, 0.4).unwrap(),
            PlanarField::poly(
                vec![PolyTerm(2, 1, 1.5), PolyTerm(0, 3, -2.0), PolyTerm(5, 0, 0.1)],
                vec![PolyTerm(1, 0, 1.0), PolyTerm(1, 4, 0.3)],
            )
            .unwrap(),
        ];
        let v = [0.37, -0.81];
        let h = 1e-6;
        for f in &fields {
            let j = f.jacobian(v);
            for axis in 0..2 {
                let mut vp = v;
                let mut vm = v;
                vp[axis] += h;
                vm[axis] -= h;
                let (fp, fm) = (f.eval(vp), f.eval(vm));
                for row in 0..2 {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    assert!((fd - j[row][axis]).abs() < 1e-7, "{f:?} {row} {axis}");
                }
            }
        }
    }

    #[test]
    fn named_points_are_zeros() {
        let f = PlanarField::cubic_coupled(1.0, 8.0, 1.0).unwrap();
        let pts = f.named_fixed_points();
        assert_eq!(pts.len(), 4);
        for np in &pts {
            let r = f.eval(np.point);
            assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14, "{np:?}");
        }
        let surd = |t: &str| t.parse::<Surd>().unwrap();
        assert_eq!(pts[1].exact.as_ref().unwrap()[0], surd("sqrt(1/8)"));
        assert_eq!(pts[2].exact.as_ref().unwrap()[0], surd("sqrt(2/9)"));
        assert_eq!(pts[2].exact.as_ref().unwrap()[1], surd("sqrt(7/9)"));
    }

    #[test]
    fn exact_jacobian_agrees_with_float() {
        let f = PlanarField::cubic_uncoupled(p("2"), p("sqrt(3)"), p("sqrt(6)"), p("sqrt(2)")).unwrap();
        for np in f.named_fixed_points() {
            let je = f.exact_jacobian(np.exact.as_ref().unwrap()).unwrap();
            let jf = f.jacobian(np.point);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((je[r][c].to_f64() - jf[r][c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn param_serde() {
        let f: PlanarField =
            serde_json::from_str(r#"{"kind":"cubic_uncoupled","a":2,"b":"sqrt(3)","c":"sqrt(6)","d":1.5}"#).unwrap();
        let PlanarField::CubicUncoupled { a, b, d, .. } = &f else {
            panic!()
        };
        assert!(a.exact_value().is_some() && b.exact_value().is_some() && d.exact_value().is_none());
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(
            back,
            r#"{"kind":"cubic_uncoupled","a":2.0,"b":"sqrt(3)","c":"sqrt(6)","d":1.5}"#
        );
        assert!(PlanarField::from_json(r#"{"kind":"cubic_coupled","k":1,"a":-1,"b":1}"#).is_err());
        assert!(PlanarField::from_json(r#"{"kind":"poly","f1":[[3,3,1.0]],"f2":[]}"#).is_err());
        assert!(PlanarField::from_json(r#"{"kind":"cubic_coupled","k":1,"a":1,"b":1,"z":0}"#).is_err());
    }
}
