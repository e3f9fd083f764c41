//! Rational helpers: "p/q" text form, extended non-negative rationals and
//! overflow-free logarithms of big numbers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("{s:?}: zero denominator")));
        }
        Ok(BigRational::new(p, q))
    } else if t.contains('.') || t.contains('e') || t.contains('E') {
        let v: f64 = t.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        BigRational::from_float(v).ok_or_else(|| Error::Parse(format!("{s:?}: not finite")))
    } else {
        let p = BigInt::from_str(t).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(BigRational::from_integer(p))
    }
}

/// Canonical text form: "p/q" in lowest terms, or "p" for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// Natural logarithm of a positive big integer without overflowing `f64`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "logarithm of non-positive rational");
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    ln_biguint(n) - ln_biguint(d)
}

pub fn to_f64(r: &BigRational) -> f64 {
    match r.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let s = if r.is_negative() { -1.0 } else { 1.0 };
            s * ln_rational(&r.abs()).exp()
        }
    }
}

pub fn biguint_ratio(n: &BigUint, d: &BigUint) -> BigRational {
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, n.clone()),
        BigInt::from_biguint(Sign::Plus, d.clone()),
    )
}

/// A value in `[0, +inf]` with exact rational finite part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(BigRational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(r) => to_f64(r),
            ExtRational::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinite) => Ordering::Less,
            (ExtRational::Infinite, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for &ExtRational {
    type Output = ExtRational;
    fn add(self, rhs: &ExtRational) -> ExtRational {
        match (self, rhs) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinite,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => f.write_str(&format_rational(r)),
            ExtRational::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            Ok(ExtRational::Infinite)
        } else {
            parse_rational(&s)
                .map(ExtRational::Finite)
                .map_err(serde::de::Error::custom)
        }
    }
}

/// Serde adapter storing a `BigRational` as its "p/q" string.
pub mod rat_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let v = RatInput::deserialize(d)?;
        v.into_rational().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let v = Vec::<RatInput>::deserialize(d)?;
        v.into_iter()
            .map(|x| x.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Accepts either a "p/q" string or a JSON integer.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum RatInput {
    Int(i64),
    Str(String),
}

impl RatInput {
    pub fn into_rational(self) -> Result<BigRational> {
        match self {
            RatInput::Int(i) => Ok(int(i)),
            RatInput::Str(s) => parse_rational(&s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_roundtrip() {
        for s in ["3/10", "-7", "0", "1/2"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(format_rational(&parse_rational("6/4").unwrap()), "3/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn ext_order_and_sum() {
        let a = ExtRational::Finite(rat(1, 2));
        let b = ExtRational::Finite(rat(1, 3));
        assert!(b < a);
        assert!(a < ExtRational::Infinite);
        assert_eq!(&a + &b, ExtRational::Finite(rat(5, 6)));
        assert_eq!(&a + &ExtRational::Infinite, ExtRational::Infinite);
    }

    #[test]
    fn big_logs() {
        let x = BigUint::from(3u32).pow(2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((ln_biguint(&x) - expect).abs() < 1e-9 * expect);
        assert!((ln_rational(&rat(1, 8)) + 8f64.ln()).abs() < 1e-12);
    }
}
