//! Exact coordinate functions: finite sums of `c · x^p · exp(e·x)` with
//! rational `c`, natural exponents `p` and integer linear forms `e`.
//!
//! The class is closed under sums, products and partial derivatives, which is
//! all that frame brackets, covariant derivatives and Lie derivatives of the
//! catalog fields need. Every value is kept in canonical form (merged terms,
//! no zero coefficients), so "is identically zero" is an exact test.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{Rational, Ring, Scalar};

/// `x^pow · exp(Σ exp_i x_i)`; both vectors trimmed of trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub pow: Vec<u32>,
    pub exp: Vec<i32>,
}

fn trim<T: PartialEq + Default>(mut v: Vec<T>) -> Vec<T> {
    while v.last().is_some_and(|x| *x == T::default()) {
        v.pop();
    }
    v
}

impl Monomial {
    pub fn new(pow: Vec<u32>, exp: Vec<i32>) -> Self {
        Monomial { pow: trim(pow), exp: trim(exp) }
    }

    pub fn is_constant(&self) -> bool {
        self.pow.is_empty() && self.exp.is_empty()
    }

    /// Total polynomial degree.
    pub fn degree(&self) -> u32 {
        self.pow.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.pow.len().max(other.pow.len());
        let pow = (0..n)
            .map(|i| self.pow.get(i).copied().unwrap_or(0) + other.pow.get(i).copied().unwrap_or(0))
            .collect();
        let m = self.exp.len().max(other.exp.len());
        let exp = (0..m)
            .map(|i| self.exp.get(i).copied().unwrap_or(0) + other.exp.get(i).copied().unwrap_or(0))
            .collect();
        Monomial::new(pow, exp)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        let mut lin = 0.0;
        for (i, &p) in self.pow.iter().enumerate() {
            if p > 0 {
                v *= x.get(i).copied().unwrap_or(0.0).powi(p as i32);
            }
        }
        for (i, &e) in self.exp.iter().enumerate() {
            lin += e as f64 * x.get(i).copied().unwrap_or(0.0);
        }
        if lin != 0.0 {
            v *= lin.exp();
        }
        v
    }

    /// Highest variable index this monomial touches, plus one.
    fn arity(&self) -> usize {
        self.pow.len().max(self.exp.len())
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct ExpPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl ExpPoly {
    pub fn constant(c: Rational) -> Self {
        let mut p = ExpPoly::default();
        p.push(Monomial::default(), c);
        p
    }

    pub fn int(c: i64) -> Self {
        ExpPoly::constant(crate::scalar::rat(c, 1))
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(i: usize) -> Self {
        let mut pow = vec![0; i + 1];
        pow[i] = 1;
        ExpPoly::term(Rational::one(), pow, vec![])
    }

    /// `exp(Σ e_i x_i)`.
    pub fn exp_linear(e: Vec<i32>) -> Self {
        ExpPoly::term(Rational::one(), vec![], e)
    }

    pub fn term(c: Rational, pow: Vec<u32>, exp: Vec<i32>) -> Self {
        let mut p = ExpPoly::default();
        p.push(Monomial::new(pow, exp), c);
        p
    }

    fn push(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    /// The value when the function is constant.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.terms.values().next().cloned().unwrap_or_else(Rational::zero))
        } else {
            None
        }
    }

    /// Non-constant part (the terms that would make `is_constant` fail).
    pub fn nonconstant_part(&self) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.is_constant())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest variable index referenced, plus one.
    pub fn arity(&self) -> usize {
        self.terms.keys().map(Monomial::arity).max().unwrap_or(0)
    }

    /// Maximum polynomial degree over all terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn has_exponentials(&self) -> bool {
        self.terms.keys().any(|m| !m.exp.is_empty())
    }

    /// Partial derivative with respect to `x_var`.
    pub fn derivative(&self, var: usize) -> ExpPoly {
        let mut out = ExpPoly::default();
        for (m, c) in &self.terms {
            let p = m.pow.get(var).copied().unwrap_or(0);
            if p > 0 {
                let mut pow = m.pow.clone();
                pow[var] -= 1;
                out.push(Monomial::new(pow, m.exp.clone()), c * Rational::from_integer(p.into()));
            }
            let e = m.exp.get(var).copied().unwrap_or(0);
            if e != 0 {
                out.push(m.clone(), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c.to_f64() * m.eval(x)).sum()
    }

    /// Evaluates `f(s_1 x_1, …, s_n x_n)`.
    pub fn eval_scaled(&self, x: &[f64], s: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(s).map(|(a, b)| a * b).collect();
        self.eval(&y)
    }
}

impl Zero for ExpPoly {
    fn zero() -> Self {
        ExpPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ExpPoly {
    fn one() -> Self {
        ExpPoly::int(1)
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(mut self, rhs: ExpPoly) -> ExpPoly {
        for (m, c) in rhs.terms {
            self.push(m, c);
        }
        self
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        self + (-rhs)
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.push(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Ring for ExpPoly {
    fn from_rational(r: &Rational) -> Self {
        ExpPoly::constant(r.clone())
    }
    fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return ExpPoly::zero();
        }
        ExpPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect() }
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if k > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.is_constant() {
                factors.push(a.to_string());
            }
            for (i, &p) in m.pow.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, p)),
                }
            }
            if !m.exp.is_empty() {
                let lin: Vec<String> = m
                    .exp
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(i, &e)| match e {
                        1 => format!("x{}", i + 1),
                        -1 => format!("-x{}", i + 1),
                        _ => format!("{e}*x{}", i + 1),
                    })
                    .collect();
                factors.push(format!("exp({})", lin.join("+").replace("+-", "-")));
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpPoly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pow: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    exp: Vec<i32>,
}

impl Serialize for ExpPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr { coeff: c.to_string(), pow: m.pow.clone(), exp: m.exp.clone() })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExpPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermRepr>::deserialize(d)?;
        let mut out = ExpPoly::zero();
        for t in terms {
            let c = Rational::from_str(&t.coeff).map_err(serde::de::Error::custom)?;
            out = out + ExpPoly::term(c, t.pow, t.exp);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(i: usize) -> ExpPoly {
        ExpPoly::var(i)
    }

    #[test]
    fn cancellation_is_exact() {
        let p = x(0) * x(1) + ExpPoly::int(3);
        let q = p.clone() - p;
        assert!(q.is_zero());
    }

    #[test]
    fn derivative_of_exponential_product() {
        // d/dx1 [x2 · e^{x1}] = x2 · e^{x1}
        let f = x(1) * ExpPoly::exp_linear(vec![1]);
        assert_eq!(f.derivative(0), f);
        // d/dx2 [x2 · e^{x1}] = e^{x1}
        assert_eq!(f.derivative(1), ExpPoly::exp_linear(vec![1]));
        // e^{x1} e^{-x1} = 1
        let one = ExpPoly::exp_linear(vec![1]) * ExpPoly::exp_linear(vec![-1]);
        assert_eq!(one, ExpPoly::one());
    }

    #[test]
    fn evaluation_matches_closed_form() {
        let f = (x(0) * x(1)).scale(&rat(1, 2)) + x(2);
        assert!((f.eval(&[2.0, 3.0, -1.0]) - 2.0).abs() < 1e-15);
        let g = x(2) * ExpPoly::exp_linear(vec![-1]);
        assert!((g.eval(&[1.0, 0.0, 2.0]) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = x(0) * ExpPoly::exp_linear(vec![0, -2]).scale(&rat(-3, 4)) + ExpPoly::int(5);
        let s = serde_json::to_string(&f).unwrap();
        let g: ExpPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn display_is_readable() {
        let f = x(0) * x(1) - ExpPoly::exp_linear(vec![-1]).scale(&rat(2, 1));
        assert_eq!(f.to_string(), "-2*exp(-x1) + x1*x2");
    }
}
