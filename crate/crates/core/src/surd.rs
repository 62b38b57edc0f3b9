//! Exact arithmetic in `ℚ(√d)`.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Rational;

/// `a + b√d` with a fixed square-free `d > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: Rational,
    pub b: Rational,
    pub d: i64,
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational, d: i64) -> Self {
        QuadSurd { a, b, d }
    }

    pub fn rational(a: Rational, d: i64) -> Self {
        QuadSurd { a, b: Rational::zero(), d }
    }

    fn dr(&self) -> Rational {
        Rational::from_integer(self.d.into())
    }

    pub fn conj(&self) -> Self {
        QuadSurd { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }

    /// Exact sign, comparing `a²` with `b²d` when the parts disagree.
    pub fn signum(&self) -> i32 {
        let sa = sgn(&self.a);
        let sb = sgn(&self.b);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        match (self.a.clone() * self.a.clone()).cmp(&(self.b.clone() * self.b.clone() * self.dr())) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    pub fn recip(&self) -> Self {
        let n = self.a.clone() * self.a.clone() - self.b.clone() * self.b.clone() * self.dr();
        QuadSurd { a: self.a.clone() / n.clone(), b: -self.b.clone() / n, d: self.d }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

fn sgn(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Add for QuadSurd {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        QuadSurd { a: self.a + o.a, b: self.b + o.b, d: self.d }
    }
}

impl Sub for QuadSurd {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        QuadSurd { a: self.a - o.a, b: self.b - o.b, d: self.d }
    }
}

impl Mul for QuadSurd {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        let d = self.dr();
        QuadSurd {
            a: self.a.clone() * o.a.clone() + self.b.clone() * o.b.clone() * d,
            b: self.a * o.b + self.b * o.a,
            d: self.d,
        }
    }
}

impl Div for QuadSurd {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for QuadSurd {
    type Output = Self;
    fn neg(self) -> Self {
        QuadSurd { a: -self.a, b: -self.b, d: self.d }
    }
}

impl QuadSurd {
    pub fn one(d: i64) -> Self {
        QuadSurd::rational(Rational::one(), d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn sign_of_mixed_parts() {
        // 5 − √17 > 0, 4 − √17 < 0
        assert_eq!(QuadSurd::new(rat(5, 1), rat(-1, 1), 17).signum(), 1);
        assert_eq!(QuadSurd::new(rat(4, 1), rat(-1, 1), 17).signum(), -1);
        assert_eq!(QuadSurd::new(rat(-3, 1), rat(1, 1), 9).signum(), 0);
    }

    #[test]
    fn reciprocal() {
        let x = QuadSurd::new(rat(3, 2), rat(1, 2), 17);
        let y = x.clone() * x.recip();
        assert_eq!(y, QuadSurd::one(17));
    }
}
