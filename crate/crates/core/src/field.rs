//! Coordinate vector fields and 1-forms with [`ExpPoly`] coefficients.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::expr::ExpPoly;
use crate::scalar::Ring;

/// `V = Σ_a V^a ∂_a` in standard coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorField(pub Vec<ExpPoly>);

/// `θ = Σ_a θ_a dx_a` in standard coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneForm(pub Vec<ExpPoly>);

impl VectorField {
    pub fn zero(n: usize) -> Self {
        VectorField(vec![ExpPoly::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `V(f) = Σ_a V^a ∂_a f`.
    pub fn apply(&self, f: &ExpPoly) -> ExpPoly {
        let mut acc = ExpPoly::zero();
        for (a, va) in self.0.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            let df = f.derivative(a);
            if !df.is_zero() {
                acc = acc + va.clone() * df;
            }
        }
        acc
    }

    /// `[V, W]^k = V(W^k) − W(V^k)`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        VectorField(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(vk, wk)| self.apply(wk) - other.apply(vk))
                .collect(),
        )
    }

    pub fn scaled(&self, f: &ExpPoly) -> VectorField {
        VectorField(self.0.iter().map(|c| c.clone() * f.clone()).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.0.iter().map(|c| c.eval(x)).collect()
    }

    /// Divergence with respect to Lebesgue measure, `Σ_a ∂_a V^a`.
    pub fn coordinate_divergence(&self) -> ExpPoly {
        self.0
            .iter()
            .enumerate()
            .fold(ExpPoly::zero(), |acc, (a, va)| acc + va.derivative(a))
    }

    /// Weights `w` when the field is exactly `−Σ w_a x_a ∂_a` with rational `w`.
    pub fn diagonal_linear_weights(&self) -> Option<Vec<crate::Rational>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for (a, va) in self.0.iter().enumerate() {
            if va.is_zero() {
                out.push(crate::Rational::zero());
                continue;
            }
            let xa = ExpPoly::var(a);
            // va must be a rational multiple of x_a
            let mut it = va.terms();
            let (m, c) = it.next()?;
            if it.next().is_some() {
                return None;
            }
            let probe = xa.scale(c);
            if probe.terms().next().map(|(pm, _)| pm) != Some(m) {
                return None;
            }
            out.push(-c.clone());
        }
        Some(out)
    }
}

impl OneForm {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `θ(V)`.
    pub fn pair(&self, v: &VectorField) -> ExpPoly {
        self.0
            .iter()
            .zip(v.0.iter())
            .fold(ExpPoly::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.0.iter().map(|c| c.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn heisenberg_bracket() {
        // [∂1, ∂2 − x1 ∂3] = −∂3
        let e1 = VectorField(vec![ExpPoly::int(1), ExpPoly::zero(), ExpPoly::zero()]);
        let e2 = VectorField(vec![ExpPoly::zero(), ExpPoly::int(1), -ExpPoly::var(0)]);
        let b = e1.bracket(&e2);
        assert_eq!(b, VectorField(vec![ExpPoly::zero(), ExpPoly::zero(), ExpPoly::int(-1)]));
    }

    #[test]
    fn weights_of_linear_diagonal_field() {
        let x = VectorField(vec![
            -ExpPoly::var(0),
            -ExpPoly::var(1),
            ExpPoly::var(2).scale(&rat(-2, 1)),
        ]);
        assert_eq!(x.diagonal_linear_weights(), Some(vec![rat(1, 1), rat(1, 1), rat(2, 1)]));
        let y = VectorField(vec![ExpPoly::int(2), ExpPoly::zero(), ExpPoly::zero()]);
        assert_eq!(y.diagonal_linear_weights(), None);
    }
}
