//! Exact arithmetic on finite sums `sum_i q_i * sqrt(n_i)` with rational `q_i`
//! and distinct squarefree `n_i`. The set is a ring, and the canonical form
//! makes equality structural, so `x == y` is an exact test.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Largest integer we are willing to factor when extracting square parts.
const FACTOR_LIMIT: u64 = 1 << 50;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Surd {
    /// squarefree radicand -> non-zero coefficient
    terms: BTreeMap<u64, BigRational>,
}

impl Surd {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(1, r);
        s
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// `sqrt(r)` for a non-negative rational small enough to factor.
    pub fn sqrt_rational(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Self::zero());
        }
        // sqrt(p/q) = sqrt(p*q) / q
        let q = r.denom().clone();
        let pq = (r.numer() * &q).to_u64().filter(|&v| v <= FACTOR_LIMIT)?;
        let (square_root, radicand) = split_square(pq);
        let mut s = Self::zero();
        s.add_term(radicand, BigRational::new(BigInt::from(square_root), q));
        Some(s)
    }

    pub fn sqrt_of_integer(n: u64) -> Option<Self> {
        Self::sqrt_rational(&BigRational::from_integer(n.into()))
    }

    /// Square root of an element, available only when the element is a
    /// non-negative rational.
    pub fn sqrt(&self) -> Option<Self> {
        Self::sqrt_rational(&self.as_rational()?)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(n, q)| q.to_f64().unwrap_or(f64::NAN) * (*n as f64).sqrt())
            .sum()
    }

    /// Absolute value. The sign of a non-zero element is read from its float
    /// value, which is reliable for elements that are not pathologically close
    /// to zero.
    pub fn abs(&self) -> Self {
        if self.to_f64() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn div_rational(&self, r: &BigRational) -> Option<Self> {
        if r.is_zero() {
            return None;
        }
        let mut out = Self::zero();
        for (n, q) in &self.terms {
            out.add_term(*n, q / r);
        }
        Some(out)
    }

    /// Multiplicative inverse, available for rationals and single-term surds.
    pub fn recip(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&n, q) = self.terms.iter().next()?;
        // 1 / (q sqrt(n)) = sqrt(n) / (q n)
        let mut out = Self::zero();
        out.add_term(n, (q * BigRational::from_integer(n.into())).recip());
        Some(out)
    }

    fn add_term(&mut self, radicand: u64, coef: BigRational) {
        if coef.is_zero() || radicand == 0 {
            return;
        }
        let entry = self.terms.entry(radicand).or_insert_with(BigRational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }
}

/// Writes `n = s^2 * t` with `t` squarefree; returns `(s, t)`.
fn split_square(mut n: u64) -> (u64, u64) {
    let (mut s, mut t) = (1u64, 1u64);
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            t *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, t * n)
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut out = self.clone();
        for (n, q) in &rhs.terms {
            out.add_term(*n, q.clone());
        }
        out
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self + &(-rhs)
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.iter().map(|(n, q)| (*n, -q)).collect(),
        }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (m, p) in &self.terms {
            for (n, q) in &rhs.terms {
                // sqrt(m) sqrt(n) = g sqrt(m/g * n/g) for squarefree m, n with g = gcd
                let g = m.gcd(n);
                let coef = p * q * BigRational::from_integer(g.into());
                out.add_term((m / g) * (n / g), coef);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Surd {
            type Output = Surd;
            fn $f(self, rhs: Surd) -> Surd {
                (&self).$f(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        -&self
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (n, q)) in self.terms.iter().enumerate() {
            let negative = q.is_negative();
            let mag = q.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if *n == 1 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "sqrt({n})")?;
            } else {
                write!(f, "{mag}*sqrt({n})")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses `q`, `sqrt(q)` or `q*sqrt(r)` with optional leading minus, where `q`
/// and `r` are integers or fractions `a/b`.
impl FromStr for Surd {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.as_str()),
        };
        let (coef, root) = match body.find("sqrt(") {
            Some(pos) => {
                let inner = body[pos + 5..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unbalanced sqrt in `{s}`"))?;
                let coef = match &body[..pos] {
                    "" => BigRational::one(),
                    c => parse_rational(
                        c.strip_suffix('*')
                            .ok_or_else(|| format!("expected `*` before sqrt in `{s}`"))?,
                    )?,
                };
                (coef, Some(parse_rational(inner)?))
            }
            None => (parse_rational(body)?, None),
        };
        let mut value = match root {
            Some(r) => Surd::sqrt_rational(&r).ok_or_else(|| format!("cannot take an exact square root in `{s}`"))?,
            None => Surd::one(),
        };
        value = &value * &Surd::from_rational(coef);
        Ok(if negative { -value } else { value })
    }
}

impl Surd {
    pub fn one() -> Self {
        Self::from_integer(1)
    }
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let parse_int = |t: &str| t.parse::<BigInt>().map_err(|e| format!("bad number `{t}`: {e}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Surd {
        text.parse().unwrap()
    }

    #[test]
    fn canonical_products() {
        assert_eq!(&s("sqrt(2)") * &s("sqrt(6)"), s("2*sqrt(3)"));
        assert_eq!(&s("sqrt(3)") * &s("sqrt(3)"), s("3"));
        assert_eq!(s("sqrt(12)"), s("2*sqrt(3)"));
        assert_eq!(s("sqrt(1/3)"), s("1/3*sqrt(3)"));
    }

    #[test]
    fn cancellation_is_exact() {
        let x = &(&s("2") * &s("sqrt(3)")) - &s("3");
        let y = &(&s("2") * &s("sqrt(3)")) - &s("2");
        assert_eq!(&y - &x, s("1"));
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn display_round_trip_for_simple_forms() {
        assert_eq!(s("-sqrt(2)").to_string(), "-sqrt(2)");
        assert_eq!((&s("2*sqrt(3)") - &s("4")).to_string(), "-4 + 2*sqrt(3)");
        assert_eq!(Surd::zero().to_string(), "0");
    }

    #[test]
    fn parse_errors() {
        assert!("sqrt(-2)".parse::<Surd>().is_err());
        assert!("1/0".parse::<Surd>().is_err());
        assert!("sqrt(2".parse::<Surd>().is_err());
        assert!("abc".parse::<Surd>().is_err());
    }

    #[test]
    fn recip_and_sqrt() {
        assert_eq!(s("sqrt(3)").recip().unwrap(), s("1/3*sqrt(3)"));
        assert_eq!(s("9/4").sqrt().unwrap(), s("3/2"));
        assert!(s("sqrt(2)").sqrt().is_none());
        assert!((&s("1") + &s("sqrt(2)")).recip().is_none());
    }

    proptest! {
        #[test]
        fn float_value_is_a_ring_homomorphism(
            a in -20i64..20, b in 1i64..30, c in -20i64..20, d in 1i64..30,
        ) {
            let x = &Surd::from_integer(a) + &Surd::sqrt_of_integer(b as u64).unwrap();
            let y = &Surd::from_integer(c) * &Surd::sqrt_of_integer(d as u64).unwrap();
            let xf = a as f64 + (b as f64).sqrt();
            let yf = c as f64 * (d as f64).sqrt();
            prop_assert!(((&x * &y).to_f64() - xf * yf).abs() < 1e-9 * (1.0 + (xf * yf).abs()));
            prop_assert!(((&x + &y).to_f64() - (xf + yf)).abs() < 1e-9 * (1.0 + xf.abs() + yf.abs()));
        }
    }
}
