use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational numbers used for every catalog table.
pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Commutative ring with an embedding of the rationals.
///
/// Implemented by `f64`, [`Rational`] and [`crate::ExpPoly`], so tensor
/// contractions can be written once and run exactly, numerically, or on
/// coordinate functions.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&rat(v, 1))
    }

    fn scale(&self, r: &Rational) -> Self {
        self.clone() * Self::from_rational(r)
    }
}

/// A field in which we can divide and measure size.
pub trait Scalar: Ring + std::ops::Div<Output = Self> + Send + Sync + 'static {
    fn to_f64(&self) -> f64;

    /// Used for pivot selection; exact fields only need "nonzero".
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn is_exact() -> bool;
}

impl Ring for f64 {
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Ring for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY).max(f64::MIN_POSITIVE)
        }
    }
    fn is_exact() -> bool {
        true
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// `true` when `r` is an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Parses `"p"`, `"p/q"` or a decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> crate::Result<Rational> {
    let t = s.trim();
    let bad = || crate::Error::Domain(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = if ip.is_empty() || ip == "-" || ip == "+" { "0".to_string() } else { ip.to_string() };
        let int: BigInt = ip.parse().map_err(|_| bad())?;
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let mag = Rational::new(int.abs() * den.clone() + frac, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_string {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
